"""CSV tables and run manifests."""
from __future__ import annotations

import csv
import datetime as _dt
import json
import os
from dataclasses import dataclass, field

from .config import ConfigDocument, format_params, load_config, parse_config
from .errors import ConfigError

HEADERS = {
    "steady": ("power_uW", "branch_index", "x_bar_pm", "re_a_bar", "im_a_bar", "stable"),
    "spectrum": (
        "dprime_MHz",
        "re_t_plus", "im_t_plus", "abs_t_plus",
        "re_t_minus", "im_t_minus", "abs_t_minus",
        "re_t_hom", "im_t_hom", "abs_t_hom",
    ),
    "kst_shift": ("shift_MHz", "kst"),
    "kst_mass": ("mass_fg", "kst"),
    "beta_map": ("kappa_GHz", "g_eps", "beta_per_fg"),
    "linearity": ("kappa_GHz", "r_fg"),
    "trajectory": ("t_ns", "re_a", "im_a", "abs_a", "x_pm"),
    "field_spectrum": ("offset_GHz", "abs_amp"),
    "report": ("mass_true_fg", "kst_sim", "mass_recovered_fg", "rel_error"),
}


def write_csv(path, kind, rows):
    """Write ``rows`` under the fixed header for ``kind``; floats use repr, so output is exact."""
    header = HEADERS[kind]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"{kind} row has {len(row)} columns, expected {len(header)}")
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return path


def read_csv(path):
    """Header and rows (as strings) of a CSV written by :func:`write_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


@dataclass
class RunManifest:
    command: str
    parameters: dict
    version: str
    config_text: str
    flags: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    timestamp: str = ""

    def to_json(self):
        return json.dumps({
            "command": self.command,
            "version": self.version,
            "timestamp": self.timestamp,
            "flags": self.flags,
            "parameters": self.parameters,
            "config_text": self.config_text,
            "outputs": sorted(self.outputs),
        }, indent=2, sort_keys=True)

    def write(self, directory):
        path = os.path.join(directory, "manifest.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")
        return path


def make_manifest(command, params, config_text, version, flags=None, outputs=()):
    now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    return RunManifest(
        command=command,
        parameters={"device": format_params(params), **params.as_dict()},
        version=version,
        config_text=config_text,
        flags=dict(flags or {}),
        outputs=list(outputs),
        timestamp=now,
    )


def load_any_config(path):
    """Parse a config file, or the embedded config of a ``manifest.json``."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", key=str(path)) from None
    if path.endswith(".json"):
        try:
            data = json.loads(text)
            text = data["config_text"]
        except (ValueError, KeyError, TypeError):
            raise ConfigError("manifest has no config_text", key=str(path)) from None
        doc = parse_config(text)
        return doc, data.get("flags", {})
    return parse_config(text), {}


__all__ = [
    "HEADERS", "RunManifest", "ConfigDocument", "load_any_config", "load_config",
    "make_manifest", "read_csv", "write_csv",
]
