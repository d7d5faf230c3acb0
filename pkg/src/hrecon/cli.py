"""Command-line front end: mask/phantom synthesis, reconstruction, metrics.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
inconsistent inputs), 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .bridge import ExternalProcessScore
from .core import MagnitudeImage, MultiCoilKSpace, ifft2c, sos_combine
from .fileio import FormatError, read_kspace, read_mask, write_kspace, write_mask, write_pgm
from .hankel import hankel_forward, tensor_form
from .lowrank import LowRankConfig
from .masks import MaskSpec, mask_generate
from .metrics import psnr, ssim
from .phantom import phantom_generate
from .pipeline import ReconAborted, ReconConfig, run_reconstruction
from .sde import GaussianScore, SamplerParams

MODE_NAMES = {"zero": "zero_filled", "sake": "sake", "lrkgm": "lrkgm"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise _UsageError(message)


def _parse_lambda(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    value = float(text)
    if not value > 0:
        raise ValueError(f"lambda must be positive, got {text}")
    return value


def _as_image(k: MultiCoilKSpace) -> MagnitudeImage:
    """CKS files carry either an image (single coil, taken as |pixels|) or
    multi-coil k-space (inverse FFT + SOS)."""
    if k.nc == 1:
        return MagnitudeImage(np.abs(k.data[:, :, 0]))
    return sos_combine(ifft2c(k.data))


def _image_to_cks(img: MagnitudeImage) -> MultiCoilKSpace:
    return MultiCoilKSpace(img.pixels[:, :, None].astype(np.complex128))


def _build_score(text: str, y: MultiCoilKSpace, window: int):
    """Parse --score: gaussian:<mu-file>[:sigma_data] or exec:<command>."""
    if text.startswith("gaussian:"):
        parts = text[len("gaussian:") :].rsplit(":", 1)
        sigma_data = 0.1
        if len(parts) == 2:
            try:
                sigma_data = float(parts[1])
            except ValueError:
                parts = [":".join(parts)]
        mu_k = read_kspace(parts[0])
        if mu_k.shape != y.shape:
            raise ValueError(
                f"score reference {mu_k.shape} does not match measurements {y.shape}"
            )
        mu_tensor = tensor_form(hankel_forward(mu_k.data, window)).data
        return GaussianScore(mu_tensor, sigma_data), None
    if text.startswith("exec:"):
        provider = ExternalProcessScore(text[len("exec:") :])
        return provider, provider
    raise ValueError(f"--score must be gaussian:<mu-file> or exec:<command>, got {text!r}")


def cmd_mask(args) -> int:
    spec = MaskSpec(args.mask_kind, args.accel, args.acs, args.seed)
    mask = mask_generate(spec, args.nx, args.ny)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_mask(out / "mask.msk", mask)
    write_pgm(out / "mask.pgm", mask.mask.astype(float))
    print(
        f"mask kind={spec.kind} grid={args.nx}x{args.ny} sampled={mask.n_sampled} "
        f"accel={mask.acceleration:.3f} -> {out / 'mask.msk'}"
    )
    return 0


def cmd_phantom(args) -> int:
    k = phantom_generate(args.nx, args.ny, args.nc, args.seed)
    truth = sos_combine(ifft2c(k.data))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_kspace(out / "phantom.cks", k)
    write_kspace(out / "truth.cks", _image_to_cks(truth))
    write_pgm(out / "truth.pgm", truth)
    print(f"phantom {args.nx}x{args.ny}x{args.nc} seed={args.seed} -> {out / 'phantom.cks'}")
    return 0


def cmd_recon(args) -> int:
    y = read_kspace(args.kspace)
    mask = read_mask(args.mask)
    if mask.mask.shape != y.shape[:2]:
        raise ValueError(f"mask grid {mask.mask.shape} does not match k-space {y.shape[:2]}")
    y = MultiCoilKSpace(y.data * mask.mask[:, :, None])  # enforce y = 0 off the mask
    truth = _as_image(read_kspace(args.truth)) if args.truth else None
    mode = MODE_NAMES[args.mode]

    score = provider = None
    if mode == "lrkgm":
        if not args.score:
            raise ValueError("--mode lrkgm requires --score")
        score, provider = _build_score(args.score, y, args.window)

    cfg = ReconConfig(
        window=args.window,
        lowrank=LowRankConfig(tau=args.tau),
        sampler=SamplerParams(
            snr_r=args.snr,
            n_outer=args.outer,
            n_inner=args.inner,
            rng_seed=args.seed,
            sigma_min=args.sigma_min,
            sigma_max=args.sigma_max,
        ),
        lambda_dc=_parse_lambda(args.lam),
        sampler_mode=mode,
        score=score,
    )
    try:
        report = run_reconstruction(cfg, y, mask, truth=truth)
    finally:
        if provider is not None:
            provider.close()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_kspace(out / "image.cks", _image_to_cks(report.image))
    write_pgm(out / "image.pgm", report.image)
    summary = f"mode={args.mode}"
    if truth is not None:
        summary += f" PSNR={psnr(truth, report.image):.4f} SSIM={ssim(truth, report.image):.6f}"
    (out / "report.log").write_text(report.to_log() + summary + "\n")
    print(summary)
    return 0


def cmd_metrics(args) -> int:
    ref = _as_image(read_kspace(args.reference))
    tst = _as_image(read_kspace(args.test))
    print(f"PSNR={psnr(ref, tst):.4f} SSIM={ssim(ref, tst):.6f}")
    return 0


def cmd_convert(args) -> int:
    src = Path(args.input)
    dst = Path(args.output)
    pair = (src.suffix.lower(), dst.suffix.lower())
    if pair == (".cks", ".pgm"):
        write_pgm(dst, _as_image(read_kspace(src)))
    elif pair == (".cks", ".npy"):
        np.save(dst, read_kspace(src).data)
    elif pair == (".msk", ".pgm"):
        write_pgm(dst, read_mask(src).mask.astype(float))
    elif pair == (".msk", ".npy"):
        np.save(dst, read_mask(src).mask)
    elif pair == (".npy", ".cks"):
        arr = np.load(src)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        write_kspace(dst, MultiCoilKSpace(arr.astype(np.complex128)))
    else:
        raise ValueError(f"unsupported conversion {src.suffix} -> {dst.suffix}")
    print(f"{src} -> {dst}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="hrecon", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mask", help="generate an undersampling mask")
    p.add_argument("--nx", type=int, default=256)
    p.add_argument("--ny", type=int, default=256)
    p.add_argument("--mask-kind", choices=("poisson2d", "random2d", "partial2d"), default="poisson2d")
    p.add_argument("--accel", type=float, default=4.0)
    p.add_argument("--acs", type=int, default=24)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("phantom", help="generate a synthetic multi-coil phantom")
    p.add_argument("--nx", type=int, default=256)
    p.add_argument("--ny", type=int, default=256)
    p.add_argument("--nc", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("recon", help="reconstruct undersampled k-space")
    p.add_argument("kspace", help="measured k-space (.cks), zero off the mask")
    p.add_argument("mask", help="sampling mask (.msk)")
    p.add_argument("--mode", choices=tuple(MODE_NAMES), default="sake")
    p.add_argument("--window", type=int, default=4)
    p.add_argument("--tau", type=int, default=24)
    p.add_argument("--lambda", dest="lam", default="inf", help="DC weight, 'inf' or a positive real")
    p.add_argument("--outer", type=int, default=30, metavar="N")
    p.add_argument("--inner", type=int, default=1, metavar="M")
    p.add_argument("--snr", type=float, default=0.075, metavar="r")
    p.add_argument("--sigma-min", type=float, default=0.01)
    p.add_argument("--sigma-max", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--score", help="gaussian:<mu-file>[:sigma_data] or exec:<command>")
    p.add_argument("--truth", help="ground-truth image (.cks) for metric traces")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_recon)

    p = sub.add_parser("metrics", help="PSNR/SSIM between two images")
    p.add_argument("reference")
    p.add_argument("test")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("convert", help="convert between cks/msk/pgm/npy by extension")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_convert)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return 1
    try:
        return args.func(args)
    except (np.linalg.LinAlgError, FloatingPointError, ReconAborted) as e:
        print(f"hrecon: numerical failure: {e}", file=sys.stderr)
        return 3
    except (FormatError, OSError, ValueError) as e:
        print(f"hrecon: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
