"""
CSV tables of experiment rows
"""
import csv
import io

CSV_HEADER = ["h", "delta", "l2_error", "energy_error", "eoc_l2", "eoc_energy", "PN", "n_l",
              "cond_lagrange", "cond_hier", "cg_iters"]


def _cell(value):
    # unavailable values stay empty
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12e}"
    return str(value)


def reports_to_csv(reports) -> str:
    """Render ErrorReport rows with the fixed header, one row per (h, delta)"""
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for report in reports:
        row = report.as_row()
        writer.writerow([_cell(row[key]) for key in CSV_HEADER])
    return output.getvalue()


def write_reports_csv(reports, path):
    content = reports_to_csv(reports)
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            f.write(content)
    except OSError as e:
        raise OSError(f"cannot write CSV file {path}: {e}") from e
    return path
