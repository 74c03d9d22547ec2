"""
IQCaption360 Toolkit - Aplicación Principal
Interfaz de línea de comandos: viewports, métricas, MOS, entrenamiento, evaluación y captions
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.config.settings import settings
from src.config.run_config import KEYS, RunConfig
from src.modules.errors import ArgumentError, IQCaptionError

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-6


def emit(payload: Dict[str, Any]):
    """Una línea JSON por resultado en stdout"""
    print(json.dumps(payload, ensure_ascii=False))


def emit_error(error: Exception):
    print(json.dumps({"success": False, "error": str(error), "type": type(error).__name__}), file=sys.stderr)


def log_resolved(resolved: Dict[str, Any]) -> Dict[str, Any]:
    """Registrar la configuración efectiva del subcomando"""
    logger.info(f"📋 Resolved config: {json.dumps(resolved, sort_keys=True, default=str)}")
    return resolved


def _run_config(args: argparse.Namespace) -> RunConfig:
    overrides = {key: getattr(args, key, None) for key in KEYS}
    return RunConfig.load(args.config, overrides, toy=args.toy)


# ==================== COMANDOS ====================

def cmd_viewports(args: argparse.Namespace) -> int:
    """ERP -> un fichero por viewport + plan.json"""
    from src.modules.geometry import equatorial_plan, extract_viewport, load_image, save_image, spherical_plan

    run_config = _run_config(args)
    run_config.log_resolved()
    model_config = run_config.to_model_config()

    if args.sampling == 'spherical':
        plan = spherical_plan(model_config.m, model_config.fov, model_config.size)
    else:
        plan = equatorial_plan(model_config.m, model_config.offset_deg, model_config.fov,
                               model_config.size, model_config.lon0_deg)

    image = load_image(args.input)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for index, spec in enumerate(plan):
        view = extract_viewport(image, spec, args.interpolation)
        files.append(str(save_image(view, out_dir / f"vp_{index:02d}.{args.format}")))

    with open(out_dir / "plan.json", 'w', encoding='utf-8') as f:
        json.dump(plan.to_dict(), f, indent=2)
    logger.info(f"✅ {len(files)} viewports written to {out_dir}")
    emit({"success": True, "plan": plan.name, "files": files})
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    from src.modules.frmetrics import FullReferenceEvaluator
    from src.modules.geometry import load_image

    evaluator = FullReferenceEvaluator(args.s_psnr_points)
    names = [n.strip() for n in args.metrics.split(',')] if args.metrics else None
    log_resolved({
        "ref": args.ref,
        "dist": args.dist,
        "metrics": names or evaluator.metric_names,
        "s_psnr_points": settings.S_PSNR_POINTS if args.s_psnr_points is None else args.s_psnr_points,
    })
    report = evaluator.evaluate(load_image(args.ref), load_image(args.dist), names)
    logger.info(evaluator.get_summary(report))
    emit(report)
    return 0 if report["success"] else 2


def cmd_content(args: argparse.Namespace) -> int:
    from src.modules.frmetrics import content_descriptors
    from src.modules.geometry import load_image

    log_resolved({"image": args.input, "descriptors": ["si", "cf"]})
    emit({"success": True, "image": args.input, **content_descriptors(load_image(args.input))})
    return 0


def cmd_mos(args: argparse.Namespace) -> int:
    """Ratings CSV -> screening -> MOS CSV + informe de screening"""
    from src.modules.stats import RatingTable, compute_mos, filter_subjects, screen_subjects, write_mos_csv

    log_resolved({
        "ratings": args.ratings,
        "out": args.out,
        "screening": not args.no_screen,
        "max_mean_deviation": args.max_mean_deviation,
        "frequency": args.screen_frequency,
        "balance": args.screen_balance,
    })
    table = RatingTable.from_csv(args.ratings)
    report = None
    if not args.no_screen:
        report = screen_subjects(table, args.max_mean_deviation, args.screen_frequency, args.screen_balance)
        table = filter_subjects(table, report.rejected)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    records = compute_mos(table)
    write_mos_csv(records, out)

    payload = {"success": True, "mos_csv": str(out), "images": len(records)}
    if report is not None:
        report_path = out.with_name(out.stem + "_screening.json")
        with open(report_path, 'w', encoding='utf-8') as f:
            json.dump(report.to_dict(), f, indent=2, ensure_ascii=False)
        payload.update(screening=str(report_path), rejected=report.rejected)
    emit(payload)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    from src.modules.runs import RunManager
    from src.modules.training import train

    run_config = _run_config(args)
    resolved = run_config.log_resolved()
    runs = RunManager(args.runs_dir)
    run = runs.create_run("train", resolved, run_config.seed)

    result = train(args.manifest, run_config.to_model_config(), run_config.to_loss_config(),
                   run_config.to_train_config(), run["run_dir"])
    summary = result.to_dict()
    runs.save_result(run["run_id"], "train", summary)
    emit({
        "success": True,
        "run_id": run["run_id"],
        "best_checkpoint": summary["best_checkpoint"],
        "final_checkpoint": summary["final_checkpoint"],
        "best_epoch": summary["best_epoch"],
        "final": summary["epochs"][-1],
    })
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    from src.modules.model import load_checkpoint
    from src.modules.runs import RunManager
    from src.modules.training import ViewportDataset, evaluate, read_manifest

    model = load_checkpoint(args.checkpoint)
    runs = RunManager(args.runs_dir)
    resolved = log_resolved({
        "checkpoint": args.checkpoint,
        "manifest": args.manifest,
        "model": model.config.to_dict(),
        "batch_size": args.batch_size,
        "seed": args.seed,
        "runs_dir": str(runs.runs_dir),
    })

    dataset = ViewportDataset(read_manifest(args.manifest), model.plan, model.dtype)
    result = evaluate(model, dataset, batch_size=args.batch_size, seed=args.seed)

    run = runs.create_run("eval", resolved, args.seed)
    runs.save_result(run["run_id"], "eval", result)
    emit({"success": True, "run_id": run["run_id"], **result["report"], "situations": result["situations"]})
    return 0


def cmd_caption(args: argparse.Namespace) -> int:
    """Texto del caption en la primera línea, registro JSON en la segunda"""
    from src.modules.caption import CaptionGenerator, RecommendationTable
    from src.modules.geometry import load_image
    from src.modules.model import load_checkpoint

    model = load_checkpoint(args.checkpoint)
    log_resolved({"checkpoint": args.checkpoint, "model": model.config.to_dict(), "table": args.table})
    table = RecommendationTable.from_json(args.table) if args.table else None
    output = model.predict(load_image(args.image))
    record = CaptionGenerator(table).from_output(output)

    print(record.text)
    emit({"success": True, "image": args.image, **record.to_dict(), "weights": output.weights.tolist()})
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    from src.modules.numerics import run_op_suite
    from src.modules.training import model_gradcheck

    log_resolved({
        "tolerance": args.tolerance,
        "seeds": args.seeds,
        "model_seeds": 0 if args.skip_model else args.model_seeds,
        "model_tolerance": args.model_tolerance,
    })
    results = run_op_suite(args.tolerance, seeds=args.seeds)
    if not args.skip_model:
        results += [model_gradcheck(seed=seed, tolerance=args.model_tolerance)
                    for seed in range(args.model_seeds)]

    failed = sorted({r.name for r in results if not r.passed})
    report = {"success": not failed, "results": [r.to_dict() for r in results], "failed": failed}
    emit(report)
    if failed:
        emit_error(RuntimeError(f"gradient check failed for {', '.join(failed)}"))
        return 1
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    from src.modules.synthesis import synthesize

    log_resolved({"out": args.out, "n": args.n, "seed": args.seed, "width": args.width, "height": args.height})
    emit(synthesize(args.out, args.n, args.seed, args.width, args.height))
    return 0


def cmd_runs(args: argparse.Namespace) -> int:
    """Listar ejecuciones o mostrar una (metadata + resumen de resultados)"""
    from src.modules.runs import RunManager

    runs = RunManager(args.runs_dir)
    log_resolved({"runs_dir": str(runs.runs_dir), "run_id": args.run_id})
    if args.run_id is None:
        listing = [{k: run.get(k) for k in ("run_id", "command", "seed", "created_at")} for run in runs.get_all_runs()]
        emit({"success": True, "runs": listing})
        return 0

    metadata = runs.get_run_metadata(args.run_id)
    if metadata is None:
        raise ArgumentError(f"unknown run '{args.run_id}' in {runs.runs_dir}")
    emit({"success": True, "metadata": metadata, "summary": runs.get_run_summary(args.run_id)})
    return 0


# ==================== PARSER ====================

def _add_run_config_args(parser: argparse.ArgumentParser):
    """Flags con puntos (--plan.offset-deg) que sobrescriben el fichero --config"""
    parser.add_argument('--config', help='fichero TOML de configuración')
    parser.add_argument('--toy', action='store_true', help='modelo de juguete (anchos 4, viewports 64x64)')
    for key in KEYS:
        flag = '--' + key.replace('_', '-')
        if key.startswith('ablate.'):
            parser.add_argument(flag, dest=key, action='store_true', default=None)
        else:
            parser.add_argument(flag, dest=key, default=None)


def create_cli() -> argparse.ArgumentParser:
    """Crear el parser con todos los subcomandos"""
    parser = argparse.ArgumentParser(prog='iqcaption360', description='IQCaption360 desk-scale toolkit')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('viewports', help='cortar viewports de una ERP')
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--sampling', choices=['equatorial', 'spherical'], default='equatorial')
    p.add_argument('--interpolation', choices=['bilinear', 'nearest'], default='bilinear')
    p.add_argument('--format', choices=['png', 'erpf'], default='png')
    _add_run_config_args(p)
    p.set_defaults(handler=cmd_viewports)

    p = sub.add_parser('metrics', help='métricas full-reference')
    p.add_argument('--ref', required=True)
    p.add_argument('--dist', required=True)
    p.add_argument('--metrics', help='lista separada por comas (todas por defecto)')
    p.add_argument('--s-psnr-points', type=int, default=None)
    p.set_defaults(handler=cmd_metrics)

    p = sub.add_parser('content', help='descriptores SI y CF')
    p.add_argument('--in', dest='input', required=True)
    p.set_defaults(handler=cmd_content)

    p = sub.add_parser('mos', help='MOS y screening de sujetos')
    p.add_argument('--ratings', required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--no-screen', action='store_true')
    p.add_argument('--max-mean-deviation', type=float, default=1.0)
    p.add_argument('--screen-frequency', type=float, default=0.05)
    p.add_argument('--screen-balance', type=float, default=0.3)
    p.set_defaults(handler=cmd_mos)

    p = sub.add_parser('train', help='entrenar desde un manifest')
    p.add_argument('--manifest', required=True)
    p.add_argument('--runs-dir', default=None)
    _add_run_config_args(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser('eval', help='evaluar un checkpoint sobre un manifest')
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--manifest', required=True)
    p.add_argument('--batch-size', type=int, default=32)
    p.add_argument('--seed', type=int, default=settings.SEED)
    p.add_argument('--runs-dir', default=None)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser('caption', help='caption de calidad para una ERP')
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--image', required=True)
    p.add_argument('--table', default=settings.CAPTION_TABLE or None)
    p.set_defaults(handler=cmd_caption)

    p = sub.add_parser('gradcheck', help='gradient check por operación y del modelo')
    p.add_argument('--tolerance', type=float, default=DEFAULT_TOLERANCE)
    p.add_argument('--seeds', type=int, default=20)
    p.add_argument('--model-seeds', type=int, default=1)
    p.add_argument('--model-tolerance', type=float, default=DEFAULT_TOLERANCE)
    p.add_argument('--skip-model', action='store_true')
    p.set_defaults(handler=cmd_gradcheck)

    p = sub.add_parser('synth', help='dataset sintético por situaciones')
    p.add_argument('--out', required=True)
    p.add_argument('--n', type=int, default=200)
    p.add_argument('--seed', type=int, default=settings.SEED)
    p.add_argument('--width', type=int, default=256)
    p.add_argument('--height', type=int, default=128)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser('runs', help='listar ejecuciones o mostrar una')
    p.add_argument('--runs-dir', default=None)
    p.add_argument('--run-id', default=None)
    p.set_defaults(handler=cmd_runs)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    args = create_cli().parse_args(argv)
    try:
        return args.handler(args)
    except IQCaptionError as e:
        logger.error(f"❌ {args.command} failed: {e}")
        emit_error(e)
        return 2
    except Exception as e:
        logger.error(f"❌ {args.command} failed unexpectedly: {e}")
        emit_error(e)
        return 1


if __name__ == '__main__':
    sys.exit(main())
