"""Command-line front end: embed, extract, attack, bench, and psnr.

Exit codes
    0  success (for extract: watermark detected)
    1  I/O failure, malformed input, or bad key material
    2  capacity violation (payload does not fit the image)
    3  embedding self-check failure
    4  valid extraction run, watermark not detected
    5  sidecar format version mismatch
    6  malformed attack spec

All JSON output validates against the packaged ``report.schema.json``.
Reports carry no timestamps so reruns with the same seeds are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import functools
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import jsonschema

from . import codec, metrics
from .attacks import AttackSpecError, apply_attack, attack_suite_default, parse_attack
from .codec import (
    CapacityError,
    EmbedParams,
    EmbedSidecar,
    SelfCheckError,
    SidecarVersionError,
)
from .imagekit import load_image, save_image
from .keystream import WatermarkKey

__all__ = ["main", "entrypoint"]

SEED_ENV_VAR = "HISTOMARK_SEED"

EXIT_OK = 0
EXIT_IO = 1
EXIT_CAPACITY = 2
EXIT_SELF_CHECK = 3
EXIT_NOT_DETECTED = 4
EXIT_SIDECAR_VERSION = 5
EXIT_BAD_ATTACK = 6

_CSV_FIELDS = ["image", "attack", "magnitude", "seed", "psnr_db", "correlation", "ber", "detected"]


@functools.cache
def _schema() -> dict:
    text = resources.files("histomark").joinpath("report.schema.json").read_text("utf-8")
    return json.loads(text)


def _emit_json(document: dict, stream=None) -> None:
    jsonschema.validate(document, _schema(), cls=jsonschema.Draft202012Validator)
    print(json.dumps(document, sort_keys=True, indent=2), file=stream or sys.stdout)


def _json_psnr(value: float):
    return None if math.isinf(value) else value


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    defaults = EmbedParams()
    parser.add_argument("--sigma", type=float, default=defaults.sigma,
                        help="Gaussian filter standard deviation")
    parser.add_argument("--lambda", dest="lam", type=float, default=defaults.lam,
                        help="embedding range factor in (0,1)")
    parser.add_argument("--bin-width", type=float, default=defaults.bin_width,
                        help="histogram bin width in gray levels")
    parser.add_argument("--threshold", type=float, default=defaults.threshold,
                        help="bin-pair population ratio enforced per bit")
    parser.add_argument("--mu", type=float, default=defaults.mu,
                        help="post-processing margin kept from bin boundaries")
    parser.add_argument("--payload", type=int, default=defaults.payload_length,
                        help="payload length in bits")
    parser.add_argument("--seed", type=int, default=defaults.rng_seed,
                        help=f"pixel-selection seed (env {SEED_ENV_VAR} overrides)")
    parser.add_argument("--search-halfwidth", type=float, default=defaults.search_halfwidth,
                        help="mean search halfwidth, fraction of the observed mean")
    parser.add_argument("--search-step", type=float, default=defaults.search_step,
                        help="mean search step, fraction of the observed mean")
    parser.add_argument("--detect-threshold", type=float, default=defaults.detect_threshold,
                        help="correlation needed to declare detection")


def _params_from_args(args) -> EmbedParams:
    seed = args.seed
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        seed = int(env_seed)
    return EmbedParams(
        sigma=args.sigma,
        lam=args.lam,
        bin_width=args.bin_width,
        threshold=args.threshold,
        mu=args.mu,
        payload_length=args.payload,
        rng_seed=seed,
        search_halfwidth=args.search_halfwidth,
        search_step=args.search_step,
        detect_threshold=args.detect_threshold,
    )


def _key_from_args(args, nonce_hex: str) -> WatermarkKey:
    key_hex = args.key
    if args.key_file:
        key_hex = Path(args.key_file).read_text("utf-8").strip()
    if key_hex is None:
        raise ValueError("a key is required (--key or --key-file)")
    key_bytes = bytes.fromhex(key_hex)
    if len(key_bytes) != 16:
        raise ValueError("key must be 32 hex characters (128 bits)")
    nonce = bytes.fromhex(nonce_hex)
    if len(nonce) != 8:
        raise ValueError("nonce must be 16 hex characters (64 bits)")
    return WatermarkKey(key_bytes=key_bytes, nonce=nonce)


def _add_key_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--key", help="128-bit key as 32 hex characters")
    group.add_argument("--key-file", help="file holding the key as 32 hex characters")


# ---------------------------------------------------------------------------
# subcommands


def cmd_embed(args) -> int:
    try:
        params = _params_from_args(args)
        nonce_hex = args.nonce or params.rng_seed.to_bytes(8, "big").hex()
        key = _key_from_args(args, nonce_hex)
        img = load_image(args.input)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_IO)

    try:
        result = codec.embed(img, key, params)
    except CapacityError as exc:
        return _fail(str(exc), EXIT_CAPACITY)
    except SelfCheckError as exc:
        return _fail(str(exc), EXIT_SELF_CHECK)

    try:
        save_image(result.watermarked, args.output)
        Path(str(args.output) + ".wmmeta").write_text(result.sidecar.to_text(), "utf-8")
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_IO)

    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    _emit_json({
        "psnr_db": _json_psnr(result.psnr_db),
        "mean_shift": result.mean_shift,
        "pixels_moved": result.pixels_moved,
        "d_gau": result.d_gau,
    })
    return EXIT_OK


def cmd_extract(args) -> int:
    try:
        sidecar = EmbedSidecar.from_text(Path(args.sidecar).read_text("utf-8"))
    except SidecarVersionError as exc:
        return _fail(str(exc), EXIT_SIDECAR_VERSION)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_IO)
    try:
        key = _key_from_args(args, sidecar.nonce_hex)
        img = load_image(args.input)
        report = codec.extract(img, key, sidecar)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_IO)

    _emit_json({
        "decoded_bits": list(report.decoded_bits),
        "correlation": report.correlation,
        "best_mean": report.best_mean,
        "ber": report.ber,
        "detected": report.detected,
    })
    return EXIT_OK if report.detected else EXIT_NOT_DETECTED


def cmd_attack(args) -> int:
    try:
        spec = parse_attack(args.spec)
    except AttackSpecError as exc:
        return _fail(str(exc), EXIT_BAD_ATTACK)
    try:
        img = load_image(args.input)
        save_image(apply_attack(img, spec), args.output)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_IO)
    return EXIT_OK


def cmd_psnr(args) -> int:
    try:
        report = metrics.psnr(load_image(args.image_a), load_image(args.image_b))
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_IO)
    _emit_json({
        "mse": report.mse,
        "psnr_db": _json_psnr(report.psnr_db),
        "max_abs_diff": report.max_abs_diff,
        "mean_shift": report.mean_shift,
    })
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        params = _params_from_args(args)
        nonce_hex = params.rng_seed.to_bytes(8, "big").hex()
        key = _key_from_args(args, nonce_hex)
        corpus_dir = Path(args.corpus)
        image_paths = sorted(
            p for p in corpus_dir.iterdir() if p.suffix.lower() in (".pgm", ".png")
        )
        if not image_paths:
            raise ValueError(f"no .pgm or .png images in {corpus_dir}")
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_IO)

    suite = attack_suite_default()
    rows = []
    errors = []
    for path in image_paths:
        try:
            img = load_image(path)
            result = codec.embed(img, key, params)
        except (OSError, ValueError, SelfCheckError) as exc:
            errors.append({"image": path.name, "error": str(exc)})
            continue
        for spec in suite:
            attacked = apply_attack(result.watermarked, spec)
            quality = metrics.psnr(result.watermarked, attacked)
            report = codec.extract(attacked, key, result.sidecar)
            rows.append({
                "image": path.name,
                "attack": spec.kind,
                "magnitude": spec.magnitude,
                "seed": spec.seed,
                "psnr_db": _json_psnr(quality.psnr_db),
                "correlation": report.correlation,
                "ber": report.ber,
                "detected": report.detected,
            })

    document = {
        "format_version": 1,
        "params": {
            "sigma": params.sigma,
            "lambda": params.lam,
            "bin_width": params.bin_width,
            "threshold": params.threshold,
            "mu": params.mu,
            "payload_length": params.payload_length,
            "rng_seed": params.rng_seed,
            "search_halfwidth": params.search_halfwidth,
            "search_step": params.search_step,
            "detect_threshold": params.detect_threshold,
        },
        "suite": [spec.label for spec in suite],
        "images": [p.name for p in image_paths],
        "rows": rows,
        "aggregates": _aggregate(rows, suite),
        "errors": errors,
    }

    # aggregates must be recomputable from the serialized rows
    roundtrip = json.loads(json.dumps(document))
    if _aggregate(roundtrip["rows"], suite) != roundtrip["aggregates"]:
        return _fail("internal error: aggregates do not match rows", EXIT_IO)

    try:
        out_json = Path(args.out)
        jsonschema.validate(document, _schema(), cls=jsonschema.Draft202012Validator)
        out_json.write_text(json.dumps(document, sort_keys=True, indent=2) + "\n", "utf-8")
        _write_csv(out_json.with_suffix(".csv"), rows)
    except OSError as exc:
        return _fail(str(exc), EXIT_IO)

    print(f"wrote {out_json} and {out_json.with_suffix('.csv')} "
          f"({len(rows)} rows, {len(errors)} errors)")
    return EXIT_OK


def _aggregate(rows, suite) -> dict:
    psnrs = [r["psnr_db"] for r in rows if r["psnr_db"] is not None]
    by_attack = {}
    for spec in suite:
        hits = [r["detected"] for r in rows
                if r["attack"] == spec.kind and r["magnitude"] == spec.magnitude]
        if hits:
            by_attack[spec.label] = sum(hits) / len(hits)
    return {
        "mean_psnr_db": sum(psnrs) / len(psnrs) if psnrs else None,
        "min_psnr_db": min(psnrs) if psnrs else None,
        "overall_detection_rate": (
            sum(r["detected"] for r in rows) / len(rows) if rows else None
        ),
        "detection_rate": by_attack,
    }


def _write_csv(path: Path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_CSV_FIELDS)
        for row in rows:
            writer.writerow([
                row["image"],
                row["attack"],
                str(row["magnitude"]),
                str(row["seed"]),
                "" if row["psnr_db"] is None else str(row["psnr_db"]),
                str(row["correlation"]),
                str(row["ber"]),
                "true" if row["detected"] else "false",
            ])


# ---------------------------------------------------------------------------
# argument wiring


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="histomark",
        description="Blind histogram-shape image watermarking tool",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_embed = sub.add_parser("embed", help="embed a key-derived payload into an image")
    p_embed.add_argument("input")
    p_embed.add_argument("output")
    _add_key_flags(p_embed)
    p_embed.add_argument("--nonce", help="override the derived 16-hex-char nonce")
    _add_param_flags(p_embed)
    p_embed.set_defaults(func=cmd_embed)

    p_extract = sub.add_parser("extract", help="blind-extract and report detection")
    p_extract.add_argument("input")
    _add_key_flags(p_extract)
    p_extract.add_argument("--sidecar", required=True, help="path to the .wmmeta sidecar")
    p_extract.set_defaults(func=cmd_extract)

    p_attack = sub.add_parser("attack", help="apply one attack to an image")
    p_attack.add_argument("input")
    p_attack.add_argument("output")
    p_attack.add_argument("spec", help="attack as kind:magnitude[:seed]")
    p_attack.set_defaults(func=cmd_attack)

    p_bench = sub.add_parser("bench", help="run the attack suite over a corpus")
    p_bench.add_argument("corpus", help="directory of .pgm/.png images")
    _add_key_flags(p_bench)
    p_bench.add_argument("--out", required=True, help="output report path (.json)")
    _add_param_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_psnr = sub.add_parser("psnr", help="image quality report between two images")
    p_psnr.add_argument("image_a")
    p_psnr.add_argument("image_b")
    p_psnr.set_defaults(func=cmd_psnr)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CapacityError,) as exc:
        return _fail(str(exc), EXIT_CAPACITY)
    except SidecarVersionError as exc:
        return _fail(str(exc), EXIT_SIDECAR_VERSION)
    except AttackSpecError as exc:
        return _fail(str(exc), EXIT_BAD_ATTACK)
    except SelfCheckError as exc:
        return _fail(str(exc), EXIT_SELF_CHECK)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_IO)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
