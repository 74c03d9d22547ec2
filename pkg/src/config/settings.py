import os
from dotenv import load_dotenv

# Cargar variables de entorno
load_dotenv()

class Settings:
    """
    Configuración de entorno para IQCaption360 (desk scale)
    """
    
    # === LOGGING ===
    LOG_LEVEL: str = os.getenv('IQC_LOG_LEVEL', 'INFO').upper()
    
    # === RUTAS ===
    DATA_DIR: str = os.getenv('IQC_DATA_DIR', './data')
    RUNS_DIR: str = os.getenv('IQC_RUNS_DIR', os.path.join(DATA_DIR, 'runs'))
    
    # === REPRODUCIBILIDAD ===
    SEED: int = int(os.getenv('IQC_SEED', '0'))
    
    # === MÉTRICAS ===
    S_PSNR_POINTS: int = int(os.getenv('IQC_S_PSNR_POINTS', '65536'))
    
    # === CAPTION ===
    CAPTION_TABLE: str = os.getenv('IQC_CAPTION_TABLE', '')
    CAPTION_GOOD: float = float(os.getenv('IQC_CAPTION_GOOD', '2.5'))
    CAPTION_FAIR: float = float(os.getenv('IQC_CAPTION_FAIR', '1.5'))

# Instancia global
settings = Settings()
