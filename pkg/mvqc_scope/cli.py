"""
Command-line front-end: ``mvqc-scope <command> ...``.

Options come from the config file named by ``--config`` or ``MVQC_CONFIG``,
then from a ``--preset``, then from explicit flags.

Exit status: 0 success (or accept), 1 error, 2 a verified sample was rejected.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from mvqc_scope import __version__
from mvqc_scope.api import Verifier
from mvqc_scope.backend import FileBackend
from mvqc_scope.config import ConfigKey, get_option, load_config_file
from mvqc_scope.core import ClassifierKind, Modality, MomentKind
from mvqc_scope.errors import MvqcError
from mvqc_scope.evaluation import (
    PRESETS,
    ExperimentConfig,
    format_summary,
    preprocess_params,
    run_grid,
    write_report_csv,
)
from mvqc_scope.imaging import (
    binarize,
    iris_pif,
    mask_to_gray,
    normalize,
    read_image,
    save_image,
    signature_normalize,
)
from mvqc_scope.manifest import load_manifest
from mvqc_scope.mvqc import load_template, save_template
from mvqc_scope.quadtree import decompose
from mvqc_scope.synthetic import gen_synthetic

logger = logging.getLogger(__name__)

CONFIG_ENV = "MVQC_CONFIG"
EXIT_OK, EXIT_ERROR, EXIT_REJECT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1 so that 2 stays reserved for rejections."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_preprocess_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--t-dark", type=int, help="Upper intensity of the pupil search range")
    parser.add_argument("--offset1", type=int, help="Iris window margin around the pupil")
    parser.add_argument("--offset2", type=int, help="Extra iris window side length")


def _preprocess_overrides(args: argparse.Namespace) -> dict[str, int]:
    overrides = {}
    preset = PRESETS.get(getattr(args, "preset", None) or "")
    if preset is not None:
        for key in ("offset1", "offset2"):
            if getattr(preset, key) is not None:
                overrides[key] = getattr(preset, key)
    for key in ("t_dark", "offset1", "offset2"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="mvqc-scope",
        description="Minimum-variance quadtree component biometric verification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument(
        "--config", type=Path, help=f"key = value option file (default: ${CONFIG_ENV})"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("preprocess", help="Write normalized samples as PGM")
    p.add_argument("images", nargs="+", type=Path)
    p.add_argument("--modality", choices=[m.value for m in Modality], required=True)
    p.add_argument("--out", type=Path, required=True, help="Output directory")
    p.add_argument("--dump-tiles", action="store_true", help="Also write every quadtree tile")
    p.add_argument("--d1", type=int, default=128, help="Tile side for --dump-tiles")
    _add_preprocess_flags(p)
    p.set_defaults(handler=cmd_preprocess)

    p = commands.add_parser("train", help="Enroll every subject of a manifest")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="Template directory")
    p.add_argument("--P", dest="P", type=int, default=3, help="Training samples per subject")
    p.add_argument("--b", type=int, required=True, help="Components to select")
    p.add_argument("--d1", type=int, default=128)
    p.add_argument("--moment", choices=[k.value for k in MomentKind], default="C")
    _add_preprocess_flags(p)
    p.set_defaults(handler=cmd_train)

    p = commands.add_parser("verify", help="Verify samples against a template")
    p.add_argument("images", nargs="+", type=Path)
    p.add_argument("--template", type=Path, required=True)
    p.add_argument(
        "--classifier",
        choices=[c.value for c in ClassifierKind],
        default=ClassifierKind.KNN.value,
    )
    p.set_defaults(handler=cmd_verify)

    p = commands.add_parser("evaluate", help="FRR/FAR over a grid of configurations")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="Report directory")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--P", dest="P", type=int)
    p.add_argument("--b", type=int, nargs="+")
    p.add_argument("--d1", type=int, nargs="+")
    p.add_argument("--moment", choices=[k.value for k in MomentKind], nargs="+")
    p.add_argument(
        "--classifiers",
        choices=[c.value for c in ClassifierKind],
        nargs="+",
        help="Default: all",
    )
    p.add_argument("--jobs", type=int, help="Subjects evaluated concurrently")
    p.add_argument("--seed", type=int, default=0, help="Recorded with the configurations")
    _add_preprocess_flags(p)
    p.set_defaults(handler=cmd_evaluate)

    p = commands.add_parser("gen-synthetic", help="Write a seeded synthetic signature dataset")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--subjects", type=int, default=20)
    p.add_argument("--genuine", type=int, default=15)
    p.add_argument("--imposters", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--margin", type=float, default=3.0)
    p.add_argument("--stable", type=int, default=4, help="Planted stable tiles per subject")
    p.set_defaults(handler=cmd_gen_synthetic)
    return parser


def cmd_preprocess(args: argparse.Namespace) -> int:
    modality = Modality(args.modality)
    params = _preprocess_overrides(args)
    for path in args.images:
        img = read_image(path)
        if modality == Modality.IRIS:
            pif = iris_pif(img, **params)
            save_image(pif, args.out / f"{path.stem}.pgm")
            bw = binarize(pif, "mean")
        else:
            bw = signature_normalize(img)
            save_image(mask_to_gray(bw), args.out / f"{path.stem}.pgm")
        if args.dump_tiles:
            grid = decompose(bw, args.d1)
            for i, tile in enumerate(grid.tiles, start=1):
                tile_path = args.out / f"{path.stem}_tiles" / f"tile_{i:03d}.pgm"
                save_image(mask_to_gray(tile), tile_path)
        logger.info("preprocessed %s", path)
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    # validate b against L before touching any image
    ExperimentConfig(P=args.P, b=args.b, d1=args.d1, kind=args.moment)
    manifest = load_manifest(args.manifest, min_genuine=args.P)
    manifest.params.update(_preprocess_overrides(args))
    preprocess = preprocess_params(manifest)
    verifier = Verifier()
    for entry in manifest.subjects:
        samples = [
            normalize(read_image(manifest.resolve_path(p)), manifest.modality, **preprocess)
            for p in entry.genuine[: args.P]
        ]
        template = verifier.enroll(
            entry.id, samples, args.d1, args.b, args.moment, manifest.modality, preprocess
        )
        save_template(template, args.out / f"{entry.id}.tpl")
        logger.info("enrolled %s with components %s", entry.id, template.indices)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    template = load_template(args.template)
    verifier = Verifier()
    status = EXIT_OK
    try:
        for path in args.images:
            probe = normalize(read_image(path), template.modality, **template.preprocess)
            decision = verifier.verify(
                template, probe, args.classifier, sample=path.as_posix()
            )
            verdict = "accept" if decision.accept else "reject"
            print(f"{verdict} score={decision.score:.6g} classifier={args.classifier}")
            if not decision.accept:
                status = EXIT_REJECT
    finally:
        verifier.flush()
    return status


def cmd_evaluate(args: argparse.Namespace) -> int:
    preset = PRESETS.get(args.preset) if args.preset else None
    P = args.P or (preset.P if preset else 3)
    bs = args.b or ([preset.b] if preset else [4])
    d1s = args.d1 or ([preset.d1] if preset else [128])
    moments = args.moment or [MomentKind.C.value]
    classifiers = args.classifiers or [c.value for c in ClassifierKind]
    configs = [
        ExperimentConfig(P=P, b=b, d1=d1, kind=kind, classifiers=classifiers, seed=args.seed)
        for b, d1, kind in itertools.product(bs, d1s, moments)
    ]

    manifest = load_manifest(args.manifest, min_genuine=P + 1)
    if preset is not None and preset.modality != manifest.modality:
        logger.warning(
            "preset %s targets %s data but the manifest is %s",
            args.preset,
            preset.modality.value,
            manifest.modality.value,
        )
    manifest.params.update(_preprocess_overrides(args))

    args.out.mkdir(parents=True, exist_ok=True)
    decisions = args.out / "decisions.jsonl"
    decisions.unlink(missing_ok=True)
    backend = FileBackend(decisions, get_option(ConfigKey.RECORDS_FILE_BUFFER_SIZE))
    report = run_grid(manifest, configs, jobs=args.jobs, backend=backend)
    write_report_csv(report, args.out / "report.csv")

    print(format_summary(report))
    if report.skipped:
        print(f"skipped {len(report.skipped)} subjects: {', '.join(report.skipped)}")
    return EXIT_OK


def cmd_gen_synthetic(args: argparse.Namespace) -> int:
    manifest = gen_synthetic(
        args.out,
        n_subjects=args.subjects,
        n_genuine=args.genuine,
        n_imposter=args.imposters,
        seed=args.seed,
        margin=args.margin,
        n_stable=args.stable,
    )
    print(f"wrote {len(manifest.subjects)} subjects to {args.out / 'manifest.txt'}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    try:
        config = args.config or os.environ.get(CONFIG_ENV)
        if config:
            load_config_file(config)
        return args.handler(args)
    except (MvqcError, OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
