"""Run every shipped config through the CLI and validate configs and reports against the schemas."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

COMMAND_OF = {
    "gen": "gen",
    "fit": "fit",
    "consistency": "consistency",
    "recovery_1state": "recovery",
    "recovery_2state": "recovery",
    "theorem2": "theorem2",
    "ce_continuity": "ce-continuity",
    "nonid": "nonid",
    "separation": "separation",
    "vc": "vc",
    "uniqueness": "uniqueness",
    "bound": "bound",
}


def main() -> int:
    binary, configs, schemas = (pathlib.Path(a).resolve() for a in sys.argv[1:4])
    config_schema = json.loads((schemas / "config.schema.json").read_text())
    report_schema = json.loads((schemas / "run_report.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(config_schema)
    jsonschema.Draft202012Validator.check_schema(report_schema)
    report_validator = jsonschema.Draft202012Validator(report_schema)

    failures = []
    names = sorted(p.stem for p in configs.glob("*.json"))
    missing = set(COMMAND_OF) - set(names)
    if missing:
        failures.append(f"configs missing: {sorted(missing)}")
    # fit reads the dataset written by gen
    names.sort(key=lambda n: n != "gen")

    with tempfile.TemporaryDirectory() as work:
        for name in names:
            command = COMMAND_OF.get(name)
            if command is None:
                failures.append(f"{name}: no command mapping")
                continue
            cfg = json.loads((configs / f"{name}.json").read_text())
            sub = dict(config_schema, **{"$ref": f"#/$defs/{command}"})
            errors = list(jsonschema.Draft202012Validator(sub).iter_errors(cfg))
            if errors:
                failures.append(f"{name}: config invalid: {errors[0].message}")
            out = pathlib.Path("runs") / name
            proc = subprocess.run(
                [str(binary), command, "--config", str(configs / f"{name}.json"), "--out", str(out)],
                cwd=work, capture_output=True, text=True)
            if proc.returncode != 0:
                failures.append(f"{name}: exit {proc.returncode}: {proc.stderr.strip()}")
                continue
            run_dir = pathlib.Path(work) / out
            report = json.loads((run_dir / "report.json").read_text())
            for err in report_validator.iter_errors(report):
                failures.append(f"{name}: report invalid at {list(err.path)}: {err.message}")
            if report["command"] != command:
                failures.append(f"{name}: report command {report['command']}")
            for cell in report["cells"]:
                if not cell["q25"] <= cell["median"] <= cell["q75"]:
                    failures.append(f"{name}: unordered quantiles at x={cell['x']}")
            xs = [c["x"] for c in report["cells"]]
            if xs != sorted(xs):
                failures.append(f"{name}: cells not sorted by x")
            if not (run_dir / f"{command}.csv").is_file():
                failures.append(f"{name}: missing {command}.csv")
            print(f"{name}: ok" if not any(f.startswith(name + ":") for f in failures) else f"{name}: FAILED")

    # the config schema must reject what the CLI rejects
    bad = {"version": 1, "n_values": [10], "typo": 1}
    sub = dict(config_schema, **{"$ref": "#/$defs/bound"})
    if jsonschema.Draft202012Validator(sub).is_valid(bad):
        failures.append("config schema accepted an unknown field")

    for f in failures:
        print(f, file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
