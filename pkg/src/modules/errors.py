"""
Error Hierarchy
Excepciones compartidas por todos los módulos del toolkit
"""


class IQCaptionError(Exception):
    """Error base del toolkit"""


class ArgumentError(IQCaptionError, ValueError):
    """Argumento fuera de rango o con forma incorrecta"""


class DegenerateInputError(IQCaptionError, ValueError):
    """Entrada degenerada (varianza cero, vacía, constante)"""


class ModelStateError(IQCaptionError, RuntimeError):
    """Estado inválido del modelo u optimizador (parámetros o gradientes ausentes)"""


class ConfigError(IQCaptionError):
    """Configuración inválida (tablas, TOML, claves desconocidas)"""


class CheckpointError(ConfigError):
    """Checkpoint con magic desconocido o formas incompatibles"""
