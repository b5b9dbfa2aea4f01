#!/usr/bin/env python3
"""
specrecon - Spectral reconstruction toolkit entry point

Subcommands: ingest, pca, loocv, reconstruct. Data goes to files or stdout,
logs go to stderr. Exit codes: 0 success, 2 configuration, 3 data,
4 numerical failure.
"""

import argparse
import sys
from typing import List, Optional

from dotenv import load_dotenv

from src import __version__
from src.cli.commands import cmd_ingest, cmd_loocv, cmd_pca, cmd_reconstruct
from src.config.settings import settings
from src.core.errors import DataError, SpecReconError
from src.ingest.dataset_csv import FLOAT_FORMAT
from src.pca.model import CENTERING_ALIASES, Centering
from src.utils.logger import setup_logger

# Load environment variables
load_dotenv()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specrecon",
        description="PCA-based surface reflectance reconstruction over 400-900 nm",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="overrides SPECRECON_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="library files listed in a manifest -> dataset CSV")
    ingest.add_argument("manifest", help="dataset manifest (YAML)")
    ingest.add_argument("--out", required=True, help="canonical dataset CSV to write")
    ingest.add_argument("--workers", type=int, default=None, help="parallel file parsing")

    pca = sub.add_parser("pca", help="fit a PCA model and write its contribution curve")
    pca.add_argument("dataset", help="dataset CSV or manifest")
    pca.add_argument("--out", required=True, help="model file to write (YAML)")
    pca.add_argument(
        "--centering",
        choices=[c.value for c in Centering] + sorted(CENTERING_ALIASES),
        default=Centering.CENTERED.value,
    )
    pca.add_argument("--pcs", type=int, default=6, help="PC spectra written to the components CSV")

    loocv = sub.add_parser("loocv", help="run a leave-one-out validation protocol")
    loocv.add_argument("protocol", help="protocol file (YAML)")
    loocv.add_argument("--out", default=None, help="output directory (default: the protocol's)")
    loocv.add_argument("--workers", type=int, default=None, help="parallel holdouts")

    recon = sub.add_parser("reconstruct", help="one-shot reconstruction")
    recon.add_argument("--mode", choices=["full", "bands", "lincomb"], required=True)
    recon.add_argument("--model", default=None, help="PCA model file (full and bands modes)")
    recon.add_argument("--lincomb", default=None, help="lin-comb model file (lincomb mode)")
    recon.add_argument("--spectrum", default=None, help="dataset CSV supplying the input spectra")
    recon.add_argument("--bands", type=float, nargs="+", default=None, help="band wavelengths (nm)")
    recon.add_argument("--values", type=float, nargs="+", default=None, help="reflectance values")
    recon.add_argument("--components", type=int, default=None, help="number of PCs")
    recon.add_argument("--snap", action="store_true", help="move bands to the nearest grid point")
    recon.add_argument("--out", default=None, help="CSV to write (default: stdout)")
    return parser


def run(args: argparse.Namespace) -> None:
    if args.command == "ingest":
        path = cmd_ingest(args.manifest, args.out, workers=args.workers)
        print(path)

    elif args.command == "pca":
        files = cmd_pca(args.dataset, args.out, Centering(args.centering), n_components=args.pcs)
        for path in files.values():
            print(path)

    elif args.command == "loocv":
        result = cmd_loocv(args.protocol, out_dir=args.out, workers=args.workers)
        print(result.summary, end="")

    elif args.command == "reconstruct":
        result = cmd_reconstruct(
            mode=args.mode,
            model_path=args.model,
            spectrum_path=args.spectrum,
            bands_nm=args.bands,
            values=args.values,
            components=args.components,
            snap=args.snap,
            lincomb_path=args.lincomb,
            out_path=args.out,
        )
        if args.out is None:
            if result.scalar is not None and result.truth is None:
                print(FLOAT_FORMAT % result.scalar)
            elif result.frame is not None:
                print(result.frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"), end="")
        for label, error in result.errors.items():
            print(f"{label}: mean relative error {FLOAT_FORMAT % error}", file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns the process exit code"""

    parser = build_parser()
    args = parser.parse_args(argv)
    logger = setup_logger(level=args.log_level or settings.log_level, log_dir=settings.log_dir)

    try:
        run(args)
    except SpecReconError as e:
        logger.error(str(e))
        return e.exit_code
    except OSError as e:
        logger.error(str(e))
        return DataError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
