"""
Console rendering of experiment rows
"""
COLUMNS = {
    "errors": [("h", "h", "{:.6g}"), ("delta", "delta", "{:.4g}"), ("l2_error", "L2", "{:.3e}"),
               ("eoc_l2", "EOC", "{:.3f}"), ("energy_error", "energy", "{:.3e}"),
               ("eoc_energy", "EOC", "{:.3f}"), ("PN", "PN", "{}"), ("n_l", "n_l", "{}"),
               ("cg_iters", "CG", "{}")],
    "condition": [("h", "h", "{:.6g}"), ("delta", "delta", "{:.4g}"), ("PN", "PN", "{}"), ("n_l", "n_l", "{}"),
                  ("cond_lagrange", "cond Lagrange", "{:.3e}"), ("cond_hier", "cond hierarchical", "{:.3e}")],
}


def format_reports(reports, columns="errors"):
    spec = COLUMNS[columns]
    rows = [[label for _, label, _ in spec]]
    for report in reports:
        row = report.as_row()
        rows.append(["-" if row[key] is None else fmt.format(row[key]) for key, _, fmt in spec])
    widths = [max(len(r[i]) for r in rows) for i in range(len(spec))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def print_reports(reports, title=None, columns="errors"):
    if title:
        print(f"\n📊 {title}")
    print(format_reports(reports, columns))
