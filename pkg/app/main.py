from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.api.routes import experiments, graphs, health, words
from app.core.logging import configure_logging
from app.services import experiments as experiment_service

configure_logging()

app = FastAPI(
    title="Word Problems API",
    description="""
## API de problemas de la palabra en grupos

Esta API proporciona endpoints para:

* 🧮 **Oráculos**: Decidir si una palabra es la identidad (libre, abeliano, Heisenberg, BS(1,2), RAAG, fibrados de toro, productos y pullbacks)
* ✂️ **Cortes regulares**: Enumerar las palabras identidad de un lenguaje regular y proyectar sus vectores de Parikh
* 📐 **Ajuste semilineal**: Buscar conjuntos semilineales acotados y comprobar certificados de crecimiento
* 🕸️ **Grafos**: Cografos, clase G y veredictos MCF para grupos de Artin de ángulo recto
* 🔁 **Schreier**: Construir y verificar el transductor de un subgrupo de índice finito
* 🧪 **Experimentos**: Ejecutar los pipelines E1 a E5
* 🏥 **Health Checks**: Verificar el estado de la API

### Configuración

Los presupuestos de búsqueda se leen de variables de entorno (o de `.env` / `.env.local`):
- `WP_MAX_ENUMERATION`: Número máximo de palabras enumeradas por corte
- `WP_FIT_SEARCH_CAP`: Número máximo de conjuntos lineales candidatos en un ajuste
- `WP_E4_MAX_STATES`: Tamaño máximo de la tabla de búsqueda de E4
- `WP_REPORTS_DIR`: Directorio de informes de la CLI
- `WP_LOG_LEVEL`: Nivel de log
    """,
    version="1.0.0",
    license_info={
        "name": "MIT",
    },
    docs_url="/docs",  # Swagger UI
    redoc_url="/redoc",  # ReDoc
    openapi_tags=[
        {
            "name": "Sistema",
            "description": "Endpoints del sistema y health checks"
        },
        {
            "name": "Palabras",
            "description": "Oráculos, cortes regulares y ajuste semilineal"
        },
        {
            "name": "Grafos",
            "description": "Clasificación de grafos y de sus grupos de Artin"
        },
        {
            "name": "Experimentos",
            "description": "Pipelines de testigos y transductores de Schreier"
        }
    ]
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include Routers
app.include_router(health.router, prefix="/health", tags=["Sistema"])
app.include_router(words.router, prefix="/api", tags=["Palabras"])
app.include_router(graphs.router, prefix="/api/graph", tags=["Grafos"])
app.include_router(experiments.router, prefix="/api", tags=["Experimentos"])

@app.get("/", tags=["Sistema"], summary="Página Principal")
async def read_root():
    """Índice de endpoints"""
    return {
        "name": "Word Problems API",
        "docs": "/docs",
        "experiments": sorted(experiment_service.EXPERIMENTS),
    }
