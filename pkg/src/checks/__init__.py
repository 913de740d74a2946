from src.checks.theorems import CheckResult, TheoremSuite, format_report

__all__ = [
    "CheckResult",
    "TheoremSuite",
    "format_report",
]
