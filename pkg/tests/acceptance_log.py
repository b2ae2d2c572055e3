"""Shared store for acceptance outcomes, printed at the end of the run."""

RESULTS: dict[int, str] = {}


def record(number: int, ok: bool, title: str, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] criterion {number:>2}: {title}"
    if detail:
        line += f" ({detail})"
    RESULTS[number] = line
    print(line)
    return ok


def skip(number: int, title: str, reason: str):
    RESULTS[number] = f"[SKIP] criterion {number:>2}: {title} ({reason})"
