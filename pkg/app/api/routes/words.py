from fastapi import APIRouter, File, Form, HTTPException, UploadFile
from typing import Optional

from app.core.errors import WordProblemError
from app.models.schemas import EvalRequest, EvalResponse, FitRequest, FitResponse, SliceRequest, SliceResponse
from app.services import csv_proc
from app.services.oracles import parse_group_spec
from app.services.parikh import fit_report, slice_points

from . import to_http_error

router = APIRouter()

@router.post("/eval", response_model=EvalResponse, summary="Evaluar Palabra")
def evaluate(request: EvalRequest):
    """
    Decide si una palabra representa la identidad del grupo indicado.
    """
    try:
        oracle = parse_group_spec(request.group)
        identity = oracle.decide(oracle.alphabet.word(request.word))
    except WordProblemError as e:
        raise to_http_error(e)
    return EvalResponse(group=request.group, word=request.word, identity=identity)

@router.post("/slice", response_model=SliceResponse, summary="Corte Regular del Problema de la Palabra")
def slice_(request: SliceRequest):
    """
    Enumera las palabras identidad de un lenguaje regular hasta la longitud dada
    y devuelve sus vectores de Parikh proyectados.
    """
    try:
        columns, points, count = slice_points(request.group, request.regex, request.max_len, request.project)
    except WordProblemError as e:
        raise to_http_error(e)
    return SliceResponse(columns=columns, points=[list(p) for p in points], words=count)

@router.post("/fit", response_model=FitResponse, summary="Ajuste Semilineal Acotado")
def fit(request: FitRequest):
    """
    Busca un conjunto semilineal que contenga `points_in` y evite `points_out`,
    y comprueba opcionalmente un certificado de crecimiento.
    """
    try:
        doc = fit_report(
            [tuple(p) for p in request.points_in],
            [tuple(p) for p in request.points_out],
            request.max_components,
            request.max_generators,
            request.coord_bound,
            request.certificate,
        )
    except WordProblemError as e:
        raise to_http_error(e)
    return FitResponse(**doc)

@router.post("/fit/upload", response_model=FitResponse, summary="Ajuste Semilineal desde CSV")
def fit_upload(
    file: UploadFile = File(...),
    max_components: int = Form(...),
    max_generators: int = Form(...),
    coord_bound: int = Form(...),
    certificate: Optional[str] = Form(None),
):
    """
    Igual que `/fit`, leyendo `points_in` de un archivo CSV con cabecera.
    """
    try:
        _, points_in = csv_proc.read_points_upload(file)
        doc = fit_report(points_in, [], max_components, max_generators, coord_bound, certificate)
    except WordProblemError as e:
        raise to_http_error(e)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return FitResponse(**doc)
