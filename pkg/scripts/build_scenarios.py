#!/usr/bin/env python3
"""Write every built-in scenario as JSON plus the scenario schema, so they can be edited and re-run."""
import json, pathlib, sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

from formation.scenarios import builtin, builtin_names, save_scenario  # noqa: E402
from formation.schemas import Scenario  # noqa: E402

OUT_DIR = pathlib.Path("data/scenarios")
SCHEMA_PATH = pathlib.Path("docs/scenario.schema.json")


def main():
    written = []
    for name in builtin_names():
        path = save_scenario(builtin(name), OUT_DIR / f"{name}.json")
        print(f"Wrote {path}")
        written.append(path)

    SCHEMA_PATH.parent.mkdir(parents=True, exist_ok=True)
    SCHEMA_PATH.write_text(json.dumps(Scenario.model_json_schema(), indent=2), encoding="utf-8")

    print(f"✅ Wrote {len(written)} scenarios to {OUT_DIR} and {SCHEMA_PATH}")


if __name__ == "__main__":
    main()
