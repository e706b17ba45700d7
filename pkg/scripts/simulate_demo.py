"""Run the bundled scenarios and summarize each outcome."""

import json
import pathlib
import subprocess
import sys
import tempfile

SCENARIOS = pathlib.Path(__file__).resolve().parent / "scenarios"


def run(name: str) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        out = pathlib.Path(tmp) / "result.json"
        proc = subprocess.run(
            [sys.executable, "-m", "altshuffle.cli", "simulate",
             str(SCENARIOS / name), "--out", str(out)],
        )
        if proc.returncode != 0:
            raise SystemExit(proc.returncode)
        for doc in json.loads(out.read_text())["runs"]:
            outputs = doc["outputs"]
            print(f"{name} seed={doc['seed']}: status={doc['status']} "
                  f"rounds={doc['rounds']} "
                  f"outputs={'-' if outputs is None else len(outputs)} "
                  f"dropped={doc['dropped']}")


def main() -> None:
    for name in ("honest_amortized.json", "honest_alternating.json",
                 "shuffler_dropout_abort.json"):
        run(name)


if __name__ == "__main__":
    main()
