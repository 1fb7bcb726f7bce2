from fastapi import APIRouter

from app.core.config import settings

router = APIRouter()

@router.get("", summary="Health Check")
async def health():
    """Verifica que la API esté funcionando y muestra los presupuestos configurados"""
    return {
        "status": "ok",
        "budgets": {
            "max_enumeration": settings.MAX_ENUMERATION,
            "fit_search_cap": settings.FIT_SEARCH_CAP,
            "e4_max_states": settings.E4_MAX_STATES,
        },
    }
