"""Session service: FastAPI app hosting interactive explainer sessions."""
