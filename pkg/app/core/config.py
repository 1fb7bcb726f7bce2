import os
from dotenv import load_dotenv

# Load environment variables (try .env.local first, then .env)
load_dotenv(".env.local")
load_dotenv()

class Settings:
    MAX_ENUMERATION = int(os.getenv("WP_MAX_ENUMERATION", "2000000"))
    FIT_SEARCH_CAP = int(os.getenv("WP_FIT_SEARCH_CAP", "250000"))
    E4_MAX_STATES = int(os.getenv("WP_E4_MAX_STATES", "2000000"))
    REPORTS_DIR = os.getenv("WP_REPORTS_DIR", "reports")
    LOG_LEVEL = os.getenv("WP_LOG_LEVEL", "INFO")

settings = Settings()
