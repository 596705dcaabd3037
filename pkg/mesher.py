# -*- coding: utf-8 -*-
"""
mesher.py
Punto de entrada por línea de comandos del generador de mallas FDTD.

Uso típico:
    python mesher.py --scene scenes/corner_reflector.json --f-min 0 --f-max 4e9 --out grid.json

Códigos de salida:
    0 - malla generada sin violaciones
    1 - error (flags inválidos, escena, parámetros, E/S)
    2 - malla generada pero la auditoría encontró violaciones
"""

# ------------------- IMPORTS -------------------
import argparse
import logging
import os
import sys
from pathlib import Path

# ------------- IMPORTS DE MÓDULOS PROPIOS -------------
import config_manager
import export_manager
import meshline_engine
import reporting_manager
import scene_ingest
from core_model import PML_N_MAX, PML_N_MIN, MeshError

# ----------------- CONFIGURACIÓN LOGGING -----------------
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATIONS = 2

D = config_manager.DEFAULT_PARAMETERS


def _triple(tipo):
    """Convierte 'a,b,c' en una lista de 3 valores del tipo indicado."""
    def parse(texto):
        partes = [p.strip() for p in texto.split(",")]
        if len(partes) != 3:
            raise argparse.ArgumentTypeError(f"se esperaban 3 valores x,y,z (recibido '{texto}')")
        try:
            return [tipo(p) for p in partes]
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"valor no válido en '{texto}': {e}") from e
    return parse


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mesher",
        description=("Genera una malla rectilínea no uniforme para FDTD. Los tamaños de celda se "
                     "expresan como divisores de la longitud de onda mínima: celda = lambda_min / valor."))
    parser.add_argument("--scene", required=True,
                        help="Documento de escena (JSON con árbol de ensamblaje, materiales y sólidos)")
    parser.add_argument("--f-min", type=float, default=None,
                        help=f"Frecuencia mínima en Hz; 0 = excitación con DC (por defecto: {D['f-min']:g})")
    parser.add_argument("--f-max", type=float, default=None,
                        help=f"Frecuencia máxima en Hz (por defecto: {D['f-max']:g})")
    parser.add_argument("--max-cell-model", type=float, default=None,
                        help=f"Celda máxima en el modelo = lambda_min / valor (por defecto: {D['max-cell-model']:g})")
    parser.add_argument("--max-cell-space", type=float, default=None,
                        help=f"Celda máxima fuera del modelo = lambda_min / valor (por defecto: {D['max-cell-space']:g})")
    parser.add_argument("--min-cell-global", type=float, default=None,
                        help=f"Celda mínima global = lambda_min / valor (por defecto: {D['min-cell-global']:g})")
    parser.add_argument("--n", type=_triple(int), default=None, metavar="X,Y,Z",
                        help="Líneas de refinamiento por lado de cada borde, por eje "
                             f"(por defecto: {','.join(map(str, D['n']))})")
    parser.add_argument("--res-fraction", type=_triple(float), default=None, metavar="X,Y,Z",
                        help="La ventana de refinamiento cubre lambda_min / valor, por eje "
                             f"(por defecto: {','.join(f'{v:g}' for v in D['res-fraction'])})")
    parser.add_argument("--pml-n", type=int, default=None,
                        help=f"Celdas PML por extremo, en [{PML_N_MIN}, {PML_N_MAX}] (por defecto: {D['pml-n']})")
    parser.add_argument("--grading-ratio-max", type=float, default=None,
                        help=f"Razón máxima entre espaciados adyacentes (por defecto: {D['grading-ratio-max']:g})")
    parser.add_argument("--out", default=None,
                        help="Fichero de salida; con varios --format se cambia la extensión por formato")
    parser.add_argument("--format", action="append", choices=export_manager.FORMATS, default=None,
                        help="Formato de salida, repetible (por defecto: según la extensión de --out, o json)")
    parser.add_argument("--report", choices=("text", "json"), default=None,
                        help=f"Formato del informe por consola (por defecto: {D['report']})")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"Hilos de trabajo, 0 = automático (por defecto: {D['threads']})")
    parser.add_argument("--config", default=None,
                        help=f"Archivo de configuración JSON con claves iguales a los flags largos "
                             f"(por defecto: ${config_manager.CONFIG_ENV_VAR} o {config_manager.CONFIG_FILE})")
    parser.add_argument("--save-config", default=None, metavar="PATH",
                        help="Guarda los parámetros combinados en PATH")
    parser.add_argument("--log-level", default=None,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
                        help="Nivel de log (por defecto: $MESHER_LOG_LEVEL o INFO)")
    return parser


def infer_format(out):
    """Deduce el formato por la extensión del fichero de salida (json por defecto)."""
    suffix = Path(out).suffix.lower()
    for fmt, ext in export_manager.SUFFIXES.items():
        if suffix == ext:
            return fmt
    return "json"


def output_paths(out, formats):
    """
    Asigna una ruta a cada formato pedido.
    Con un único formato se usa --out tal cual; con varios se sustituye la extensión.
    """
    if not out:
        return {}
    formats = list(dict.fromkeys(formats or [infer_format(out)]))
    if len(formats) == 1:
        return {formats[0]: Path(out)}
    return {fmt: Path(out).with_suffix(export_manager.SUFFIXES[fmt]) for fmt in formats}


def _flags(args):
    return {
        "f-min": args.f_min,
        "f-max": args.f_max,
        "max-cell-model": args.max_cell_model,
        "max-cell-space": args.max_cell_space,
        "min-cell-global": args.min_cell_global,
        "n": args.n,
        "res-fraction": args.res_fraction,
        "pml-n": args.pml_n,
        "grading-ratio-max": args.grading_ratio_max,
        "threads": args.threads,
        "report": args.report,
    }


def run(argv=None):
    """
    Ejecuta el mallador completo.

    Args:
        argv (list, opcional): Argumentos (sin el nombre del programa). None usa sys.argv.

    Returns:
        int: Código de salida (0 ok, 1 error, 2 violaciones).
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse ya imprimió el uso o la ayuda.
        return EXIT_OK if e.code in (0, None) else EXIT_ERROR

    nivel = args.log_level or os.getenv("MESHER_LOG_LEVEL", "INFO")
    logging.getLogger().setLevel(getattr(logging, str(nivel).upper(), logging.INFO))

    try:
        config = config_manager.load_parameters(args.config)
        merged = config_manager.merge_parameters(config, _flags(args))
        params = config_manager.build_mesh_params(merged)
        band = config_manager.build_band(merged)
        threads = config_manager.build_threads(merged)
        if args.save_config and not config_manager.save_parameters(merged, args.save_config):
            raise MeshError(f"No se pudo guardar la configuración en {args.save_config}")

        tree, materials = scene_ingest.parse_scene(args.scene)
        grid, report = meshline_engine.generate_grid(tree, materials, band, params,
                                                     threads=threads)
        for fmt, path in output_paths(args.out, args.format).items():
            export_manager.export(grid, report, path, fmt)
    except MeshError as e:
        logging.error(f"❌ {e}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR

    if merged.get("report") == "json":
        print(reporting_manager.report_to_json(report, params, band))
    else:
        print(reporting_manager.format_report_text(report, params, band))
    return EXIT_VIOLATIONS if report.violations else EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
