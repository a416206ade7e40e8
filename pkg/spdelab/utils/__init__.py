from .report import VerificationReport, write_reports
