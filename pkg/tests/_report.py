"""One PASS/FAIL line per acceptance criterion, echoed in the pytest summary."""
from contextlib import contextmanager

LINES: list[str] = []


@contextmanager
def criterion(number: int, title: str):
    """Record the outcome of the enclosed checks; details go in the yielded dict."""
    info: dict = {}
    try:
        yield info
    except BaseException as exc:
        info.setdefault("error", f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
        _emit(number, title, False, info)
        raise
    _emit(number, title, True, info)


def _emit(number, title, ok, info):
    detail = ", ".join(f"{k}={v}" for k, v in info.items())
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {title}" + (f" ({detail})" if detail else "")
    print(line)
    LINES.append(line)
