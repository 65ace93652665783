"""xApp store: onboarding, manifest validation, Pseudo-RIC acceptance
testing, and a deployment/monitoring gateway over a simulated RAN."""

__version__ = "0.1.0"
