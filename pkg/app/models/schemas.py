from pydantic import BaseModel, Field, field_validator
from typing import Any, Dict, List, Optional


# ---------------------------------------------------------------------------
# File documents
# ---------------------------------------------------------------------------

class HomDocument(BaseModel):
    """Homomorphism file: images of the source generators as words of the target"""
    source: List[str] = Field(..., description="Generadores del alfabeto de origen")
    images: Dict[str, str] = Field(..., description="Imagen de cada generador (palabra del destino)")


class AlphabetDocument(BaseModel):
    letters: List[str] = Field(..., min_length=1, description="Generadores; los inversos se derivan")


class AutomatonDocument(BaseModel):
    alphabet: List[str] = Field(..., description="Generadores del alfabeto simétrico")
    states: List[str] = Field(..., description="Estados del autómata")
    start: str = Field(..., description="Estado inicial")
    accepting: List[str] = Field(default_factory=list, description="Estados de aceptación")
    edges: List[List[str]] = Field(default_factory=list, description="Aristas [origen, palabra, destino]")

    @field_validator("edges")
    @classmethod
    def edges_are_triples(cls, edges):
        for edge in edges:
            if len(edge) != 3:
                raise ValueError(f"cada arista necesita [origen, palabra, destino], recibido {edge}")
        return edges


class TransducerDocument(BaseModel):
    first_alphabet: List[str] = Field(..., description="Generadores de la primera cinta")
    second_alphabet: List[str] = Field(..., description="Generadores de la segunda cinta")
    states: List[str]
    start: str
    accepting: List[str] = Field(default_factory=list)
    edges: List[List[str]] = Field(default_factory=list, description="Aristas [origen, u, v, destino]")

    @field_validator("edges")
    @classmethod
    def edges_are_quadruples(cls, edges):
        for edge in edges:
            if len(edge) != 4:
                raise ValueError(f"cada arista necesita [origen, u, v, destino], recibido {edge}")
        return edges


class GraphDocument(BaseModel):
    """Graph file: vertex names and undirected edges"""
    vertices: List[str] = Field(..., description="Nombres de los vértices, en orden")
    edges: List[List[str]] = Field(default_factory=list, description="Aristas [u, v]")


class CosetActionDocument(BaseModel):
    degree: int = Field(..., ge=1, description="Número de coclases; la coclase 0 es el subgrupo")
    perms: Dict[str, List[int]] = Field(..., description="Permutación de cada generador positivo")


# ---------------------------------------------------------------------------
# Requests
# ---------------------------------------------------------------------------

class EvalRequest(BaseModel):
    group: str = Field(..., description="Grupo en el mini-lenguaje (ej: bs12, free:2, product(free:2,free:2:p,q))")
    word: str = Field("", description="Palabra a evaluar (ej: taTAA)")


class SliceRequest(BaseModel):
    group: str = Field(..., description="Grupo en el mini-lenguaje")
    regex: str = Field(..., description="Expresión regular del corte (ej: t*a(T)*(A)*)")
    max_len: int = Field(..., ge=0, description="Longitud máxima de las palabras")
    project: List[str] = Field(..., min_length=1, description="Selectores de coordenadas (ej: ['t', 'A'] o ['x+y'])")


class FitRequest(BaseModel):
    points_in: List[List[int]] = Field(..., description="Puntos que el conjunto debe contener")
    points_out: List[List[int]] = Field(default_factory=list, description="Puntos que el conjunto debe evitar")
    max_components: int = Field(..., ge=0)
    max_generators: int = Field(..., ge=0)
    coord_bound: int = Field(..., ge=0)
    certificate: Optional[str] = Field(None, description="vertical-gap | exp:BASE | quad:COEFF")


class SchreierRequest(BaseModel):
    group: str = Field(..., description="Supergrupo en el mini-lenguaje")
    action: CosetActionDocument = Field(..., description="Acción por permutaciones sobre las coclases")
    bound: int = Field(8, ge=0, le=12, description="Longitud máxima de verificación")
    corrupt: bool = Field(False, description="Si es True, invierte una etiqueta para comprobar que la verificación falla")


class ExperimentRequest(BaseModel):
    max_len: Optional[int] = Field(None, description="E1, E2, E5: longitud máxima")
    n_max: Optional[int] = Field(None, description="E3, E4, E5: valor máximo de n")
    m_max: Optional[int] = Field(None, description="E4: valor máximo de m")


# ---------------------------------------------------------------------------
# Responses
# ---------------------------------------------------------------------------

class EvalResponse(BaseModel):
    group: str
    word: str
    identity: bool = Field(..., description="True si la palabra representa la identidad")


class SliceResponse(BaseModel):
    columns: List[str] = Field(..., description="Nombres de las columnas (selectores)")
    points: List[List[int]] = Field(..., description="Puntos de Parikh proyectados, sin duplicados")
    words: int = Field(..., description="Número de palabras identidad en el corte")


class FitResponse(BaseModel):
    found: bool
    components: List[Dict[str, Any]] = Field(default_factory=list)
    certificate: Optional[Dict[str, Any]] = None
    max_collinear: Optional[int] = None
