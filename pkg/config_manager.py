# Importa el módulo json para trabajar con datos en formato JSON (serialización/deserialización).
import json
# Importa el módulo logging para registrar eventos y mensajes del mallador.
import logging
# Importa el módulo os para interactuar con el sistema operativo, como acceder a variables de entorno.
import os

# Carga variables de entorno desde un archivo .env si existe (MESHER_CONFIG, MESHER_LOG_LEVEL, MESHER_THREADS).
from dotenv import load_dotenv

from core_model import ConfigError, FrequencyBand, MeshError, MeshParams

load_dotenv()

# Configura el sistema de registro para este módulo.
logging.basicConfig(level=logging.INFO,
                    format='%(asctime)s - %(levelname)s - %(message)s')

# Nombre del archivo de configuración local por defecto.
CONFIG_FILE = "config.json"
# Variable de entorno que apunta a un archivo de configuración alternativo.
CONFIG_ENV_VAR = "MESHER_CONFIG"

# Parámetros por defecto. Las claves coinciden con los flags largos de la línea de comandos.
DEFAULT_PARAMETERS = {
    # Banda de excitación en Hz. f-min = 0 indica una excitación con DC.
    "f-min": 0.0,
    "f-max": 4e9,
    # Divisores de lambda_min: celda máxima dentro del modelo, fuera del modelo y celda mínima global.
    "max-cell-model": 40.0,
    "max-cell-space": 30.0,
    "min-cell-global": 300.0,
    # Líneas de refinamiento por lado de cada borde, por eje (X, Y, Z).
    "n": [3, 3, 3],
    # Fracción de longitud de onda que cubre la ventana de refinamiento, por eje.
    "res-fraction": [6.0, 6.0, 6.0],
    # Celdas PML por extremo, en [4, 50].
    "pml-n": 8,
    # Razón máxima entre espaciados adyacentes.
    "grading-ratio-max": 2.0,
    # Hilos de trabajo (0 = automático).
    "threads": 0,
    # Formato del informe por consola: text | json.
    "report": "text",
}

# Claves que acaban en MeshParams (el resto son de banda o de ejecución).
MESH_KEYS = ("max-cell-model", "max-cell-space", "min-cell-global", "n", "res-fraction",
             "pml-n", "grading-ratio-max")


def _normalize_keys(params):
    """Acepta claves con guion bajo o con guion; devuelve siempre la forma con guion."""
    return {str(k).replace("_", "-"): v for k, v in params.items()}


def load_parameters(path=None):
    """
    Carga los parámetros del mallador.
    Orden de búsqueda: la ruta explícita, después la variable MESHER_CONFIG y por último config.json.
    Si la ruta se indicó explícitamente (argumento o variable de entorno) y no se puede leer,
    se lanza ConfigError. Si falta el config.json por defecto se devuelven los valores por defecto.

    Returns:
        dict: Parámetros por defecto actualizados con los del archivo.
    """
    explicito = path or os.getenv(CONFIG_ENV_VAR)
    ruta = explicito or CONFIG_FILE

    if not os.path.exists(ruta):
        if explicito:
            # Una ruta pedida explícitamente que no existe es un error del usuario.
            logging.error(f"❌ No se encontró el archivo de configuración {ruta}")
            raise ConfigError(f"No se encontró el archivo de configuración {ruta}")
        logging.warning(
            f"⚠️ No se encontró {ruta}. Cargando parámetros por defecto.")
        return dict(DEFAULT_PARAMETERS)

    try:
        # Abre el archivo en modo lectura.
        with open(ruta, 'r', encoding='utf-8') as f:
            datos = json.load(f)
    except json.JSONDecodeError as e:
        # Si el archivo no es un JSON válido, registra el error y lo propaga.
        logging.error(f"❌ Error al decodificar JSON de {ruta}: {e}")
        raise ConfigError(f"JSON mal formado en {ruta}: {e}") from e
    except OSError as e:
        logging.error(f"❌ Error al cargar parámetros desde {ruta}: {e}")
        raise ConfigError(f"No se pudo leer {ruta}: {e}") from e

    if not isinstance(datos, dict):
        raise ConfigError(f"{ruta} debe contener un objeto JSON")

    desconocidas = sorted(set(_normalize_keys(datos)) - set(DEFAULT_PARAMETERS))
    if desconocidas:
        # Las claves desconocidas se ignoran, pero se avisa para detectar erratas.
        logging.warning(f"⚠️ Claves desconocidas en {ruta}: {', '.join(desconocidas)}")

    params = dict(DEFAULT_PARAMETERS)
    params.update({k: v for k, v in _normalize_keys(datos).items() if k in DEFAULT_PARAMETERS})
    logging.info(f"✅ Parámetros cargados desde {ruta}.")
    return params


def save_parameters(params, path=CONFIG_FILE):
    """
    Guarda los parámetros en un archivo JSON indentado.

    Returns:
        bool: True si el guardado fue exitoso.
    """
    try:
        with open(path, 'w', encoding='utf-8') as f:  # Abre el archivo en modo escritura.
            # Guarda los parámetros en formato JSON con indentación para legibilidad.
            json.dump(_normalize_keys(params), f, indent=4)
        logging.info(f"✅ Parámetros guardados en {path}.")
        return True  # Indica que el guardado fue exitoso.
    except OSError as e:
        # Si hay un error de entrada/salida al escribir el archivo, registra el error.
        logging.error(f"❌ Error al escribir en el archivo {path}: {e}")
        return False  # Indica que el guardado falló.


def merge_parameters(config, flags):
    """
    Combina parámetros con precedencia flags > archivo de configuración > valores por defecto.

    Args:
        config (dict): Parámetros cargados (ya incluyen los valores por defecto).
        flags (dict): Valores de la línea de comandos; None significa "no indicado".
    """
    merged = dict(DEFAULT_PARAMETERS)
    merged.update(_normalize_keys(config or {}))
    merged.update({k: v for k, v in _normalize_keys(flags or {}).items() if v is not None})
    return merged


def build_mesh_params(params):
    """
    Construye MeshParams desde el dict combinado.

    Lanza ParameterError si algún valor está fuera de rango y ConfigError si alguno
    no tiene el tipo esperado (p. ej. "pml-n": "ocho" en el archivo de configuración).
    """
    try:
        return MeshParams.from_mapping({k: params[k] for k in MESH_KEYS if k in params})
    except MeshError:
        raise
    except (TypeError, ValueError) as e:
        logging.error(f"❌ Parámetro de mallado con tipo inválido: {e}")
        raise ConfigError(f"Parámetro de mallado con tipo inválido: {e}") from e


def build_band(params):
    """
    Construye la FrequencyBand desde el dict combinado.

    Lanza InvalidBandError si la banda es inválida y ConfigError si f-min / f-max no son números.
    """
    try:
        f_min, f_max = float(params["f-min"]), float(params["f-max"])
    except (KeyError, TypeError, ValueError) as e:
        logging.error(f"❌ Banda de frecuencias con valor inválido: {e!r}")
        raise ConfigError(f"f-min y f-max deben ser números (error: {e!r})") from e
    return FrequencyBand(f_min, f_max)


def build_threads(params):
    """Número de hilos del dict combinado (0 = automático). Lanza ConfigError si no es un entero >= 0."""
    valor = params.get("threads") or 0
    try:
        hilos = int(valor)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"threads debe ser un entero >= 0 (recibido {valor!r})") from e
    if hilos < 0 or hilos != valor:
        raise ConfigError(f"threads debe ser un entero >= 0 (recibido {valor!r})")
    return hilos
