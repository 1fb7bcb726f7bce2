from fastapi import APIRouter, HTTPException

from app.core.errors import WordProblemError
from app.models.schemas import ExperimentRequest, SchreierRequest
from app.services import experiments
from app.services.reports import run_record
from app.services.schreier import schreier_run

from . import to_http_error

router = APIRouter()

@router.get("/experiments/geometries", summary="Veredictos por Geometría")
def geometries():
    """Tabla de veredictos MCF de las ocho geometrías tridimensionales"""
    return {"geometries": experiments.geometry_verdicts()}

@router.post("/experiments/{experiment_id}", summary="Ejecutar Experimento")
def run_experiment(experiment_id: str, request: ExperimentRequest):
    """
    Ejecuta uno de los experimentos E1 a E5 y devuelve su registro de ejecución.

    Un fallo de comprobación devuelve 422 con la diferencia encontrada.
    """
    experiment_id = experiment_id.upper()
    if experiment_id not in experiments.EXPERIMENTS:
        raise HTTPException(status_code=404, detail=f"Experimento desconocido: {experiment_id}")
    kwargs = {k: getattr(request, k) for k in experiments.EXPERIMENT_PARAMETERS[experiment_id] if getattr(request, k) is not None}
    try:
        with run_record(experiment_id, kwargs, timing=True) as record:
            record["results"] = experiments.EXPERIMENTS[experiment_id](**kwargs).to_document()
    except WordProblemError as e:
        raise to_http_error(e)
    return record

@router.post("/schreier", summary="Transductor de Schreier")
def schreier(request: SchreierRequest):
    """
    Construye el diagrama de Schreier, el árbol generador, los generadores del subgrupo
    y el transductor, y verifica la transducción hasta la longitud indicada.
    """
    try:
        return schreier_run(request.group, request.action.model_dump(), request.bound, request.corrupt, timing=True)
    except WordProblemError as e:
        raise to_http_error(e)
