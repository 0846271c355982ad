"""coeffgen command line: `generate` the coefficient table, `render` figures."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_IDS, render_figure
from .generate import generate_table
from .states import StateSpec, UnsupportedStates, spec_from_labels


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coeffgen")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write the Stark-coefficient CSV")
    gen.add_argument("-o", "--out", required=True, help="output CSV path")
    gen.add_argument("--doubly", default="59D3/2", help="doubly excited level")
    gen.add_argument("--partner-a", default="61P1/2", help="first coupled level")
    gen.add_argument("--partner-b", default="57F5/2", help="second coupled level")
    gen.add_argument("--species", default="Rb87")
    gen.add_argument("--b-field-G", type=float, default=0.0)
    gen.add_argument("--e-start", type=float, default=0.0, help="mV/cm")
    gen.add_argument("--e-stop", type=float, default=60.0, help="mV/cm")
    gen.add_argument("--e-step", type=float, default=0.1, help="mV/cm")

    ren = sub.add_parser("render", help="render a figure from simulator CSVs")
    ren.add_argument("figure", choices=FIGURE_IDS)
    ren.add_argument("-o", "--out", required=True, help="output image path")
    ren.add_argument("inputs", nargs="+", help="input CSV file(s)")
    ren.add_argument(
        "--e-res", type=float, default=29.787,
        help="resonance field for normalized profile axes (mV/cm)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "generate":
        try:
            spec = spec_from_labels(
                args.doubly,
                args.partner_a,
                args.partner_b,
                species=args.species,
                b_field_gauss=args.b_field_G,
                e_start=args.e_start,
                e_stop=args.e_stop,
                e_step=args.e_step,
            )
            path = generate_table(spec, args.out)
        except (UnsupportedStates, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(path)
        return 0
    try:
        path = render_figure(args.figure, args.inputs, args.out, e_res=args.e_res)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
