"""
Persist experiment runs and their rows
"""
from typing import Optional

import config
from .db import get_session
from .models import ExperimentRun, ResultRow


def record_run(command: str, cfg, reports=(), status: str = config.STATUS_COMPLETED,
               message: Optional[str] = None) -> Optional[int]:
    """
    Store one run with its rows; returns the run id, or None when recording
    is disabled
    """
    if not config.RESULTS_DB:
        return None
    with get_session() as session:
        run = ExperimentRun(
            command=command,
            example=cfg.example,
            basis=cfg.basis,
            delta=None if cfg.sweep else cfg.delta,
            delta_range=":".join(f"{v:g}" for v in cfg.sweep) if cfg.sweep else None,
            tolerance=cfg.tol,
            h_list=",".join(f"{h:.12g}" for h in cfg.h_list),
            status=status,
            message=message,
        )
        for report in reports:
            run.rows.append(ResultRow(
                h=report.h,
                delta=report.delta,
                l2_error=report.l2_error,
                energy_error=report.energy_error,
                eoc_l2=report.eoc_l2,
                eoc_energy=report.eoc_energy,
                pn=report.PN,
                n_l=report.n_l,
                n_fallback_patches=report.n_fallback_patches,
                cond_lagrange=report.cond_lagrange,
                cond_hier=report.cond_hier,
                cg_iters=report.cg_iters,
            ))
        session.add(run)
        session.flush()
        return run.id
