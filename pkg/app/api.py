import asyncio
import logging
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from app.core.exceptions import InputError, ValidationFailure
from app.core.json_formatter import jsonable
from app.core.pipeline import build_config, run_job

logger = logging.getLogger(__name__)

app = FastAPI(
    title="FejerCalc API",
    description="Fejér functional calculus for finite-dimensional unitary operators",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class JobRequest(BaseModel):
    """Same fields as the command-line flags. Only builtin operators and vectors are
    accepted over HTTP; file paths are never read on the server."""

    generate: str = Field(..., description="Builtin generator", example="shift")
    dim: int = Field(..., gt=0, le=4096, description="Operator dimension", example=4)
    seed: int = Field(0, description="Generator seed", example=0)
    function: Optional[str] = Field(None, description="Expression or builtin name", example="z")
    basis: Optional[int] = Field(None, description="x = e_basis", example=0)
    random_seed: Optional[int] = Field(None, description="x random with this seed")
    y_basis: Optional[int] = Field(None, description="y = e_y_basis", example=1)
    y_random_seed: Optional[int] = Field(None, description="y random with this seed")
    N: Optional[int] = Field(None, ge=0, description="Fejér order", example=8)
    n_list: Optional[List[int]] = Field(None, description="Orders for the convergence sweep", example=[8, 32, 128])
    grid_M: Optional[int] = Field(None, description="Grid size M >= 2N+2")
    streaming: bool = Field(False, description="Streaming moment accumulation")

    model_config = {
        "json_schema_extra": {
            "example": {
                "generate": "shift",
                "dim": 4,
                "function": "z",
                "basis": 0,
                "y_basis": 1,
                "N": 8,
            }
        }
    }


class PerformanceMetrics(BaseModel):
    latency_ms: float = Field(..., example=12.5)
    memory_used_mb: float = Field(..., example=96.3)


class JobResponse(BaseModel):
    result: Dict[str, Any]
    metrics: PerformanceMetrics


def _execute(command: str, request: JobRequest):
    config = build_config(command=command, **request.model_dump())
    return run_job(config)


async def _run(command: str, request: JobRequest) -> JobResponse:
    try:
        loop = asyncio.get_event_loop()
        result, metrics = await loop.run_in_executor(None, _execute, command, request)
    except ValidationFailure as e:
        logger.info("%s rejected: %s", command, e)
        raise HTTPException(status_code=422, detail=str(e))
    except (InputError, OSError) as e:
        logger.info("%s input error: %s", command, e)
        raise HTTPException(status_code=400, detail=str(e))
    return JobResponse(result=jsonable(result.payload), metrics=PerformanceMetrics(**metrics))


@app.post("/verify", response_model=JobResponse)
async def verify(request: JobRequest):
    return await _run("verify", request)


@app.post("/moments", response_model=JobResponse)
async def moments(request: JobRequest):
    return await _run("moments", request)


@app.post("/apply", response_model=JobResponse)
async def apply(request: JobRequest):
    return await _run("apply", request)


@app.post("/functional", response_model=JobResponse)
async def functional(request: JobRequest):
    return await _run("functional", request)


@app.post("/density", response_model=JobResponse)
async def density(request: JobRequest):
    return await _run("density", request)


@app.post("/convergence", response_model=JobResponse)
async def convergence(request: JobRequest):
    return await _run("convergence", request)


@app.post("/oracle", response_model=JobResponse)
async def oracle(request: JobRequest):
    return await _run("oracle", request)
