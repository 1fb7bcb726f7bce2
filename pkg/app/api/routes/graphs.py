from fastapi import APIRouter, File, HTTPException, UploadFile

from app.core.errors import WordProblemError
from app.models.schemas import GraphDocument
from app.services import graphs
from app.services.graphs import graph_report

from . import to_http_error

router = APIRouter()

MODES = ("classify", "cograph", "certificate")


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise HTTPException(status_code=404, detail=f"Modo desconocido: {mode}. Use uno de {', '.join(MODES)}")

@router.post("/{mode}", summary="Analizar Grafo")
def analyze_graph(mode: str, document: GraphDocument):
    """
    Analiza un grafo simple:

    - `classify`: veredicto MCF del RAAG asociado, con testigo P4 o C4 si no lo es
    - `cograph`: P4 inducido y descomposición en join
    - `certificate`: certificado de pertenencia a la clase G, verificado por reconstrucción
    """
    _check_mode(mode)
    try:
        return graph_report(graphs.parse_graph_document(document.model_dump()), mode)
    except WordProblemError as e:
        raise to_http_error(e)

@router.post("/{mode}/upload", summary="Analizar Grafo desde Archivo")
def analyze_graph_upload(mode: str, file: UploadFile = File(...)):
    """
    Igual que el anterior, leyendo un archivo `.json` o una lista de aristas.
    """
    _check_mode(mode)
    contents = file.file.read()
    try:
        text = contents.decode("utf-8")
    except UnicodeDecodeError:
        text = contents.decode("latin1")
    try:
        if (file.filename or "").endswith(".json"):
            g = graphs.parse_graph_document(GraphDocument.model_validate_json(text).model_dump())
        else:
            g = graphs.parse_edge_list(text)
        return graph_report(g, mode)
    except WordProblemError as e:
        raise to_http_error(e)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
