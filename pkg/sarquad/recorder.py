"""
Write the outputs of mission runs

Every file is first written to `<name>.tmp` next to its destination and then
renamed, so a failed run never leaves a partially written output behind.
"""

from dataclasses import dataclass, field, fields
import hashlib
import os
from pathlib import Path
from typing import Dict, List

from ._version import version
from .loops import MissionResult
from .sim.mission import MissionMetrics
from .sim.perception import DetectorProfile, throughput

TELEMETRY_HEADER = ("time_s,x,y,z,roll,pitch,yaw,"
    "est_roll,est_pitch,est_yaw,est_alt,u1,u2,u3,u4")
DETECTIONS_HEADER = ("frame_index,sim_time_s,target_id,"
    "x_min,y_min,x_max,y_max,confidence,visibility")
COMPARISON_HEADER = ("method,fps,sec_per_image,targets_detected,time_to_first_detection,"
    "targets_total,frames_processed,detections_emitted,coverage_fraction,flight_time,status")
SWEEP_HEADER = ("param,value,targets_detected,time_to_first_detection,"
    "roll_rms_error,pitch_rms_error,altitude_rms_error,coverage_fraction,flight_time,status")

TELEMETRY_FILE = "telemetry.csv"
DETECTIONS_FILE = "detections.csv"
METRICS_FILE = "metrics.txt"
MANIFEST_FILE = "manifest.txt"
COMPARISON_FILE = "comparison.csv"
SWEEP_SUMMARY_FILE = "sweep_summary.csv"

def _number(value: float) -> str:
    return "{:.6f}".format(value)

def _optional(value, formatter = _number) -> str:
    return "none" if value is None else formatter(value)

def write_atomically(path: Path, text: str):
    """
    Write the text to the file through a temporary file and a rename
    """
    tmp_path = path.with_name(path.name + ".tmp")
    try:
        with open(tmp_path, "w", encoding = "utf-8", newline = "\n") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if tmp_path.exists():
            tmp_path.unlink()
        raise

def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()

def format_telemetry(rows: List[tuple]) -> str:
    lines = [TELEMETRY_HEADER]
    lines.extend(",".join(_number(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"

def format_detections(rows: List[tuple]) -> str:
    lines = [DETECTIONS_HEADER]
    for frame_index, time, detection in rows:
        target = "" if detection.target_id is None else str(detection.target_id)
        lines.append(",".join([str(frame_index), _number(time), target] +
            [_number(v) for v in detection.bbox.as_tuple()] +
            [_number(detection.confidence), _number(detection.visibility)]))
    return "\n".join(lines) + "\n"

def format_metrics(metrics: MissionMetrics) -> str:
    """
    Format the metrics as `key = value` lines
    """
    lines = []
    for f in fields(metrics):
        value = getattr(metrics, f.name)
        if value is None:
            text = "none"
        elif isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = _number(value)
        else:
            text = str(value)
        lines.append("{} = {}".format(f.name, text))
    return "\n".join(lines) + "\n"

@dataclass
class RunManifest:
    """
    The self-description of a run directory

    @var config_entries The resolved config entries of the run
    @var checksums The sha256 of every output file, by file name
    """
    config_path: str
    seed: int
    output_dir: str
    config_entries: Dict[str, str]
    artifact_version: str = version
    checksums: Dict[str, str] = field(default_factory = dict)

    def to_text(self) -> str:
        lines = [
            "config_path = {}".format(self.config_path),
            "seed = {}".format(self.seed),
            "version = {}".format(self.artifact_version),
            "output_dir = {}".format(self.output_dir),
        ]
        lines.extend("config.{} = {}".format(key, value)
            for key, value in self.config_entries.items())
        lines.extend("checksum.{} = {}".format(name, digest)
            for name, digest in self.checksums.items())
        return "\n".join(lines) + "\n"

def write_run(result: MissionResult, out_dir: Path, config_path,
        config_entries: Dict[str, str], seed: int) -> RunManifest:
    """
    Write the outputs of one mission run and its manifest

    The manifest is written last, after every listed file is in place.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents = True, exist_ok = True)

    outputs = {
        TELEMETRY_FILE: format_telemetry(result.telemetry),
        DETECTIONS_FILE: format_detections(result.detections),
        METRICS_FILE: format_metrics(result.metrics),
    }
    manifest = RunManifest(str(config_path), seed, str(out_dir), dict(config_entries))
    for name, text in outputs.items():
        path = out_dir / name
        write_atomically(path, text)
        manifest.checksums[name] = sha256_of(path)

    write_atomically(out_dir / MANIFEST_FILE, manifest.to_text())
    return manifest

def comparison_rows(profiles: List[DetectorProfile], metrics: List[MissionMetrics]) -> list:
    """
    Build the rows of the comparison table: the detector timings followed by
    the mission columns
    """
    rows = []
    for profile, m in zip(profiles, metrics):
        rows.append([profile.name,
            "{:.3f}".format(throughput(profile)),
            "{:.3f}".format(profile.seconds_per_image),
            str(m.targets_detected),
            _optional(m.time_to_first_detection, "{:.3f}".format),
            str(m.targets_total),
            str(m.frames_processed),
            str(m.detections_emitted),
            "{:.3f}".format(m.coverage_fraction),
            "{:.3f}".format(m.flight_time),
            str(m.status)])
    return rows

def write_comparison(out_dir: Path, rows: list) -> Path:
    path = Path(out_dir) / COMPARISON_FILE
    lines = [COMPARISON_HEADER] + [",".join(row) for row in rows]
    write_atomically(path, "\n".join(lines) + "\n")
    return path

def print_table(header: str, rows: list):
    """
    Print the rows as left-justified columns
    """
    table = [header.split(",")] + rows
    widths = [max(len(row[i]) for row in table) for i in range(len(table[0]))]
    for row in table:
        print(" ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())

def sweep_row(param: str, value: str, metrics: MissionMetrics) -> list:
    return [param, value,
        str(metrics.targets_detected),
        _optional(metrics.time_to_first_detection),
        _number(metrics.roll_rms_error),
        _number(metrics.pitch_rms_error),
        _number(metrics.altitude_rms_error),
        _number(metrics.coverage_fraction),
        _number(metrics.flight_time),
        str(metrics.status)]

def write_sweep_summary(out_dir: Path, rows: list) -> Path:
    path = Path(out_dir) / SWEEP_SUMMARY_FILE
    lines = [SWEEP_HEADER] + [",".join(row) for row in rows]
    write_atomically(path, "\n".join(lines) + "\n")
    return path
