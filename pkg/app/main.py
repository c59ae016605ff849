from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.api import app as api_app
from app.config import configure_logging

configure_logging()

app = FastAPI(
    title="FejerCalc",
    description="Fejér functional calculus for finite-dimensional unitary operators",
    version="1.0.0",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)

app.mount("/api", api_app)


@app.get("/")
def read_root():
    return {"message": "Welcome to FejerCalc. Visit /api/docs for Swagger UI."}
