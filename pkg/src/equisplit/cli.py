"""Command-line experiment runner.

Verbs map onto campaigns; a single JSON config file describes the instance
family and the flags override its seed/trial/expectation fields.  The
structured report goes to a file in the output directory (flag --out, or
the EQUISPLIT_OUT environment variable - the only environment override);
a human summary goes to stdout.  Exit codes: 0 all mandatory checks
passed, 1 verification failure, 2 malformed config.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from .campaigns import replay_fixture, run_campaign, shrink_fixture
from .errors import ConfigError
from .serialize import canonical_json

VERB_TO_CAMPAIGN = {
    "verify-support-projection": "support-projection",
    "run-resolution": "resolution",
    "run-splitting": "splitting",
    "run-retraction": "retraction",
    "fuzz": "fuzz",
}


def _add_campaign_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="JSON config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--trials", type=int, help="override the trial count")
    p.add_argument("--out", type=Path, help="output directory for reports")
    p.add_argument(
        "--expect-bad-characteristic",
        action="store_true",
        help="trials must fail with BadCharacteristic naming a subgroup",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equisplit",
        description="Exact verification campaigns for support projections and equivariant splittings",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERB_TO_CAMPAIGN:
        p = sub.add_parser(verb, help=f"run the {VERB_TO_CAMPAIGN[verb]} campaign")
        _add_campaign_flags(p)
    ps = sub.add_parser("shrink", help="minimize a failing fixture file")
    ps.add_argument("fixture", type=Path, help="fixture JSON file")
    ps.add_argument("--out", type=Path, help="output directory")
    ps.add_argument("--replay", action="store_true", help="only replay, do not shrink")
    return parser


def _load_config(args) -> dict:
    config = {}
    if args.config is not None:
        try:
            config = json.loads(args.config.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
    config["campaign"] = VERB_TO_CAMPAIGN[args.verb]
    if args.seed is not None:
        config["seed"] = args.seed
    if args.trials is not None:
        config["trials"] = args.trials
    if args.expect_bad_characteristic:
        config["expect_bad_characteristic"] = True
    return config


def _out_dir(args) -> Path:
    if getattr(args, "out", None) is not None:
        out = args.out
    elif os.environ.get("EQUISPLIT_OUT"):
        out = Path(os.environ["EQUISPLIT_OUT"])
    else:
        out = Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_report(report: dict, out: Path) -> Path:
    path = out / "report.json"
    path.write_text(canonical_json(report) + "\n")
    fixtures = report.get("counterexamples", [])
    if fixtures:
        fdir = out / "fixtures"
        fdir.mkdir(exist_ok=True)
        for i, fixture in enumerate(fixtures):
            (fdir / f"counterexample-{i:03d}.json").write_text(
                canonical_json(fixture) + "\n"
            )
    return path


def _print_summary(report: dict, path: Path):
    s = report["summary"]
    print(f"campaign:         {report['campaign']}")
    print(f"seed:             {report['seed']}")
    print(f"trials:           {s['trials']}  (passed {s['passed']}, failed {s['failed']})")
    if report["campaign"] == "fuzz":
        print(f"counterexamples:  {s['counterexamples_found']}")
    if s.get("bad_characteristic_trials"):
        print(f"bad-characteristic trials: {s['bad_characteristic_trials']}")
    print(f"report:           {path}")
    print(f"wall clock:       {report['timing']['wall_clock_seconds']}s")
    verdict = "PASS" if report["all_mandatory_passed"] else "FAIL"
    print(f"verdict:          {verdict}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verb == "shrink":
        return _run_shrink(args)
    try:
        config = _load_config(args)
        report = run_campaign(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    path = _write_report(report, _out_dir(args))
    _print_summary(report, path)
    return 0 if report["all_mandatory_passed"] else 1


def _run_shrink(args) -> int:
    try:
        fixture = json.loads(args.fixture.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: cannot read fixture: {exc}", file=sys.stderr)
        return 2
    out = _out_dir(args)
    if args.replay:
        record = replay_fixture(fixture)
        print(canonical_json(record))
        return 0 if not record["all_identities_hold"] else 1
    minimized = shrink_fixture(fixture)
    path = out / "minimized-fixture.json"
    path.write_text(canonical_json(minimized) + "\n")
    print(f"cells: {sorted(set(fixture.get('sigma_cells', fixture.get('minimized_cells'))))}"
          f" -> {minimized['minimized_cells']}")
    print(f"failing checks: {minimized['failing_checks']}")
    print(f"written: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
