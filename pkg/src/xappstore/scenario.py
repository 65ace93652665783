"""Deterministic simulated RAN: gNBs, waypoint-mobile UEs, log-distance
path loss, hysteresis handover and periodic KPM indications.

Everything advances on a logical clock in tick_ms steps.  Given the same
ScenarioConfig (seed included) the event log is byte-identical across runs;
all logged reals are rounded to 3 decimal places at serialization to keep
logs comparable.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

from .errors import ParseError


@dataclass(frozen=True)
class GnbConfig:
    id: str
    x_m: float
    y_m: float
    tx_power_dbm: float


@dataclass(frozen=True)
class UeConfig:
    id: str
    start: tuple
    waypoints: tuple
    speed_mps: float


@dataclass(frozen=True)
class RadioConfig:
    pl0_db: float = 40.0
    ref_dist_m: float = 1.0
    path_loss_exponent: float = 3.0
    noise_floor_dbm: float = -100.0
    handover_hysteresis_db: float = 3.0
    bandwidth_hz: float = 1e6


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    tick_ms: int
    arena: tuple  # (width_m, height_m)
    gnbs: tuple
    ues: tuple
    radio: RadioConfig

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        try:
            arena = (float(doc["arena"]["width_m"]), float(doc["arena"]["height_m"]))
            gnbs = tuple(
                GnbConfig(g["id"], float(g["position"]["x_m"]),
                          float(g["position"]["y_m"]), float(g["tx_power_dbm"]))
                for g in doc["gnbs"])
            ues = tuple(
                UeConfig(u["id"],
                         (float(u["start"]["x_m"]), float(u["start"]["y_m"])),
                         tuple((float(w["x_m"]), float(w["y_m"]))
                               for w in u["waypoints"]),
                         float(u["speed_mps"]))
                for u in doc["ues"])
            radio = RadioConfig(**doc.get("radio", {}))
            cfg = cls(seed=int(doc["seed"]), tick_ms=int(doc["tick_ms"]),
                      arena=arena, gnbs=gnbs, ues=ues, radio=radio)
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError("malformed_document", "", f"bad scenario config: {e}") from None
        cfg.check()
        return cfg

    @classmethod
    def from_json(cls, raw: bytes) -> "ScenarioConfig":
        try:
            doc = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise ParseError("malformed_document", "", f"not valid JSON: {e}") from None
        return cls.from_dict(doc)

    def check(self):
        if self.tick_ms <= 0:
            raise ParseError("malformed_document", "tick_ms", "tick_ms must be positive")
        w, h = self.arena
        ids = [g.id for g in self.gnbs] + [u.id for u in self.ues]
        if len(set(ids)) != len(ids):
            raise ParseError("malformed_document", "", "gNB/UE IDs must be unique")
        for g in self.gnbs:
            if not (0 <= g.x_m <= w and 0 <= g.y_m <= h):
                raise ParseError("malformed_document", g.id, "gNB outside arena")
        for u in self.ues:
            for (x, y) in (u.start, *u.waypoints):
                if not (0 <= x <= w and 0 <= y <= h):
                    raise ParseError("malformed_document", u.id, "UE path outside arena")
            if u.speed_mps <= 0:
                raise ParseError("malformed_document", u.id, "speed must be positive")


def _r3(x: float) -> float:
    return round(x, 3)


@dataclass(frozen=True)
class ScenarioEvent:
    seq: int
    sim_time_ms: int
    kind: str  # MOVE | HANDOVER | KPM_REPORT
    data: dict

    def to_json_obj(self) -> dict:
        return {"seq": self.seq, "sim_time_ms": self.sim_time_ms,
                "kind": self.kind, **self.data}


@dataclass(frozen=True)
class KpmIndication:
    gnb_id: str
    period_ms: int
    connected_ue_count: int
    per_ue: tuple  # of {ue_id, rsrp_dbm, throughput_bps_per_hz}
    subscription_id: str
    sim_time_ms: int

    def to_payload(self) -> bytes:
        return json.dumps({
            "gnb_id": self.gnb_id,
            "period_ms": self.period_ms,
            "connected_ue_count": self.connected_ue_count,
            "per_ue": [{"ue_id": r["ue_id"], "rsrp_dbm": _r3(r["rsrp_dbm"]),
                        "throughput_bps_per_hz": _r3(r["throughput_bps_per_hz"])}
                       for r in self.per_ue],
            "subscription_id": self.subscription_id,
            "sim_time_ms": self.sim_time_ms,
        }, sort_keys=True).encode("utf-8")


class World:
    """Owns all mutable scenario state; all mutation happens inside tick()."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.sim_time_ms = 0
        self.ue_positions = {u.id: u.start for u in config.ues}
        # distance travelled along each UE's looped polyline
        self._ue_travelled = {u.id: 0.0 for u in config.ues}
        self.event_log: list[ScenarioEvent] = []
        self._seq = 0
        self.serving_map = {}
        for u in config.ues:
            self.serving_map[u.id] = self._best_gnb(u.start)[0]

    # --- radio -----------------------------------------------------------

    def rsrp(self, gnb: GnbConfig, ue_position) -> float:
        """Log-distance path loss, no fading; distance clamped to ref_dist."""
        r = self.config.radio
        d = math.dist((gnb.x_m, gnb.y_m), ue_position)
        d = max(d, r.ref_dist_m)
        pl = r.pl0_db + 10.0 * r.path_loss_exponent * math.log10(d / r.ref_dist_m)
        return gnb.tx_power_dbm - pl

    def _gnb(self, gnb_id: str) -> GnbConfig:
        return next(g for g in self.config.gnbs if g.id == gnb_id)

    def _best_gnb(self, position):
        """argmax rsrp; ties broken by lowest gNB ID."""
        best = None
        for g in sorted(self.config.gnbs, key=lambda g: g.id):
            r = self.rsrp(g, position)
            if best is None or r > best[1]:
                best = (g.id, r)
        return best

    def handover_decision(self, ue_id: str):
        """Return (from_gnb, to_gnb) if the hysteresis rule fires, else None."""
        pos = self.ue_positions[ue_id]
        serving = self.serving_map[ue_id]
        best_id, best_rsrp = self._best_gnb(pos)
        if best_id == serving:
            return None
        serving_rsrp = self.rsrp(self._gnb(serving), pos)
        if best_rsrp > serving_rsrp + self.config.radio.handover_hysteresis_db:
            return (serving, best_id)
        return None

    # --- mobility --------------------------------------------------------

    def _polyline(self, ue: UeConfig):
        return (ue.start, *ue.waypoints)

    def _position_at(self, ue: UeConfig, travelled: float):
        pts = self._polyline(ue)
        if len(pts) == 1:
            return pts[0]
        # closed loop: last waypoint connects back to start
        loop = list(pts) + [pts[0]]
        seg_lens = [math.dist(loop[i], loop[i + 1]) for i in range(len(loop) - 1)]
        total = sum(seg_lens)
        if total <= 0:
            return pts[0]
        s = travelled % total
        for i, seg in enumerate(seg_lens):
            if s <= seg or i == len(seg_lens) - 1:
                if seg == 0:
                    continue
                frac = s / seg
                (x0, y0), (x1, y1) = loop[i], loop[i + 1]
                return (x0 + frac * (x1 - x0), y0 + frac * (y1 - y0))
            s -= seg
        return pts[0]

    # --- stepping --------------------------------------------------------

    def _log(self, kind: str, data: dict) -> ScenarioEvent:
        ev = ScenarioEvent(self._seq, self.sim_time_ms, kind, data)
        self._seq += 1
        self.event_log.append(ev)
        return ev

    def tick(self, subscriptions=()) -> list:
        """Advance one tick: move UEs, evaluate handovers, emit due KPM
        indications for the given active subscriptions.

        Returns the events logged this tick.  KPM_REPORT events carry the
        KpmIndication in data["indication"]; the caller routes them.
        """
        start_idx = len(self.event_log)
        self.sim_time_ms += self.config.tick_ms
        dt_s = self.config.tick_ms / 1000.0

        for ue in self.config.ues:
            self._ue_travelled[ue.id] += ue.speed_mps * dt_s
            new_pos = self._position_at(ue, self._ue_travelled[ue.id])
            self.ue_positions[ue.id] = new_pos
            self._log("MOVE", {"ue": ue.id, "x_m": _r3(new_pos[0]),
                               "y_m": _r3(new_pos[1])})

        for ue in self.config.ues:
            ho = self.handover_decision(ue.id)
            if ho is not None:
                frm, to = ho
                self.serving_map[ue.id] = to
                self._log("HANDOVER", {"ue": ue.id, "from": frm, "to": to})

        for sub in subscriptions:
            if not sub.active:
                continue
            elapsed = self.sim_time_ms - sub.created_at
            if elapsed > 0 and elapsed % sub.report_period_ms == 0:
                ind = self._kpm_indication(sub)
                self._log("KPM_REPORT", {"gnb": sub.gnb_id,
                                         "subscription": sub.id,
                                         "payload": json.loads(ind.to_payload()),
                                         "indication": ind})

        return self.event_log[start_idx:]

    def _kpm_indication(self, sub) -> KpmIndication:
        r = self.config.radio
        gnb = self._gnb(sub.gnb_id)
        rows = []
        for ue_id in sorted(self.serving_map):
            if self.serving_map[ue_id] != sub.gnb_id:
                continue
            rsrp = self.rsrp(gnb, self.ue_positions[ue_id])
            snr_db = rsrp - r.noise_floor_dbm
            thr = math.log2(1.0 + 10.0 ** (snr_db / 10.0))
            rows.append({"ue_id": ue_id, "rsrp_dbm": rsrp,
                         "throughput_bps_per_hz": thr})
        return KpmIndication(
            gnb_id=sub.gnb_id, period_ms=sub.report_period_ms,
            connected_ue_count=len(rows), per_ue=tuple(rows),
            subscription_id=sub.id, sim_time_ms=self.sim_time_ms)

    # --- read models -----------------------------------------------------

    def snapshot(self, recent_events: int = 50) -> dict:
        """Immutable view of the run; safe for concurrent readers."""
        return {
            "sim_time_ms": self.sim_time_ms,
            "arena": {"width_m": self.config.arena[0],
                      "height_m": self.config.arena[1]},
            "gnbs": [{"id": g.id, "x_m": _r3(g.x_m), "y_m": _r3(g.y_m)}
                     for g in self.config.gnbs],
            "ue_positions": {uid: {"x_m": _r3(p[0]), "y_m": _r3(p[1])}
                             for uid, p in sorted(self.ue_positions.items())},
            "serving_map": dict(sorted(self.serving_map.items())),
            "event_count": len(self.event_log),
            "recent_events": [self._strip(e) for e in self.event_log[-recent_events:]],
        }

    @staticmethod
    def _strip(ev: ScenarioEvent) -> dict:
        obj = ev.to_json_obj()
        obj.pop("indication", None)
        return obj

    def export_log_jsonl(self) -> str:
        lines = []
        for ev in self.event_log:
            obj = self._strip(ev)
            lines.append(json.dumps(obj, sort_keys=True))
        return "\n".join(lines)

    def state_hash(self) -> str:
        """Hash of radio/mobility state: proof that xApp traffic cannot
        perturb the simulation."""
        blob = json.dumps({
            "sim_time_ms": self.sim_time_ms,
            "positions": {u: [_r3(p[0]), _r3(p[1])]
                          for u, p in sorted(self.ue_positions.items())},
            "travelled": {u: _r3(d) for u, d in sorted(self._ue_travelled.items())},
            "serving": dict(sorted(self.serving_map.items())),
            "config_seed": self.config.seed,
        }, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()
