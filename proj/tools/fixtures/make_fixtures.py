#!/usr/bin/env python3
"""Regenerate the district4 scenario: weather, appliance profile, topology,
scenario config, coupling file and reference records.

Output is deterministic; rerunning produces identical bytes.
"""

import argparse
import datetime as dt
import json
import math
import random
from pathlib import Path

YEAR = 2019
STEP = 900
STEPS = 365 * 96
LATITUDE = math.radians(51.0)
TARGET_MEAN_C = 10.512
SEASON_MEAN_C = 4.4
SEASON_DAYS = 222
SET_POINT_C = 20.0
AIR_CHANGE = 0.6
ROOM_HEIGHT = 2.5
DELTA_U_TBR = 0.1


def in_season(day):
    return day <= 129 or day >= 273


def stamp(k):
    t = dt.datetime(YEAR, 1, 1) + dt.timedelta(seconds=k * STEP)
    return t.strftime("%Y-%m-%dT%H:%M")


def daily_noise(rng, days, sigma, phi):
    out, x = [], 0.0
    for _ in range(days + 1):
        x = phi * x + math.sqrt(1 - phi * phi) * rng.gauss(0.0, sigma)
        out.append(x)
    return out


def weather(rng):
    cloud_raw = daily_noise(rng, 365, 1.0, 0.6)
    cloud = [min(1.0, max(0.15, 0.6 + 0.3 * c)) for c in cloud_raw]
    noise = daily_noise(rng, 365, 2.5, 0.8)
    seasonal, rest, ghi = [], [], []
    for k in range(STEPS):
        day = k // 96
        hour = (k % 96) / 4.0 + 0.125
        frac = hour / 24.0
        decl = math.radians(23.45) * math.sin(2 * math.pi * (284 + day + 1) / 365)
        angle = math.radians(15.0 * (hour - 12.0))
        sin_alt = math.sin(LATITUDE) * math.sin(decl) + math.cos(LATITUDE) * math.cos(decl) * math.cos(angle)
        c = cloud[day] * (1 - frac) + cloud[day + 1] * frac
        ghi.append(max(0.0, 1050.0 * sin_alt ** 1.15 * c) if sin_alt > 0 else 0.0)
        seasonal.append(-math.cos(2 * math.pi * (day + frac - 20) / 365))
        n = noise[day] * (1 - frac) + noise[day + 1] * frac
        rest.append(9.8 + n + 3.5 * c * math.cos(2 * math.pi * (hour - 15.0) / 24.0))
    # Amplitude chosen so that, after the loader shifts the annual mean to the
    # target, the heating-season mean matches the typology's reference climate.
    hs = [k for k in range(STEPS) if in_season(k // 96)]
    mean = lambda xs, idx: sum(xs[i] for i in idx) / len(idx)
    every = range(STEPS)
    amp = (SEASON_MEAN_C - TARGET_MEAN_C - (mean(rest, hs) - mean(rest, every))) / (
        mean(seasonal, hs) - mean(seasonal, every))
    temps = [round(r + amp * s, 2) for r, s in zip(rest, seasonal)]
    return temps, [round(g, 1) for g in ghi], amp


APPLIANCES = [
    # name, peak W, hours active (start, end), daily duty fraction
    ("light", 180, [(6, 8), (17, 23)], 0.6),
    ("stove", 1800, [(11.5, 12.5), (18, 19)], 0.35),
    ("coffee_machine", 1000, [(7, 7.5)], 0.5),
    ("toaster", 800, [(7, 7.25)], 0.6),
    ("electric_kettle", 2000, [(7, 7.25), (16, 16.25)], 0.5),
    ("entertainment", 150, [(18, 23)], 0.8),
    ("hood", 120, [(11.5, 12.5), (18, 19)], 0.35),
    ("oven", 2200, [(17.5, 18.5)], 0.15),
    ("dryer", 2500, [(10, 12)], 0.08),
    ("fridge", 90, [(0, 24)], 0.45),
    ("dishwasher", 1900, [(20, 21.5)], 0.3),
    ("microwave", 900, [(12, 12.25), (19, 19.25)], 0.4),
    ("washing_machine", 1200, [(9, 11)], 0.12),
    ("hair_dryer", 1600, [(7, 7.25)], 0.5),
    ("vehicle", 0, [], 0.0),
]


def appliances(rng):
    cols = []
    for name, peak, windows, duty in APPLIANCES:
        col = []
        for day in range(365):
            winter = 0.5 + 0.5 * math.cos(2 * math.pi * (day - 10) / 365)
            on_day = rng.random() < (duty if name not in ("fridge", "light", "entertainment") else 1.0)
            for q in range(96):
                hour = q / 4.0
                active = any(a <= hour < b for a, b in windows)
                if name == "fridge":
                    p = peak if rng.random() < duty else 5
                elif name == "light":
                    p = peak * (0.4 + 0.6 * winter) if active else 5
                elif name == "entertainment":
                    p = peak if active else 8
                else:
                    p = peak if (active and on_day) else 0
                col.append(int(round(p)))
        cols.append(col)
    return cols


# Envelope data of the German single-family typology classes 1958-68 and
# 1979-83: surface area per m2 reference floor area and U-values of the
# existing (001) and refurbished (002) variants.
TYPES = {
    "SFH05": {
        "reference_area": 110.0, "storeys": 1,
        "ratios": {"roof": 1.396, "wall": 1.167, "wall2": 0.072, "floor": 0.957, "window": 0.224, "door": 0.017},
        "001": {"roof": 0.832, "wall": 1.211, "wall2": 0.75, "floor": 1.312, "window": 2.8, "door": 3.0,
                "g": 0.75, "f_red": 0.85},
        "002": {"roof": 0.353, "wall": 0.22, "wall2": 0.193, "floor": 0.328, "window": 1.3, "door": 1.326,
                "g": 0.6, "f_red": 0.92},
    },
    "SFH07": {
        "reference_area": 240.0, "storeys": 2,
        "ratios": {"roof": 0.46667, "wall": 0.738, "wall2": 0.0, "floor": 0.386, "window": 0.125, "door": 0.00926},
        "001": {"roof": 0.495, "wall": 0.783, "wall2": 0.0, "floor": 0.666, "window": 4.3, "door": 3.0,
                "g": 0.75, "f_red": 0.88},
        "002": {"roof": 0.353, "wall": 0.2, "wall2": 0.0, "floor": 0.264, "window": 1.3, "door": 1.326,
                "g": 0.6, "f_red": 0.93},
    },
}

BUILDINGS = [
    ("B1", "SFH05", "001", "DE.N.SFH.05.Gen.ReEx.001.001"),
    ("B2", "SFH05", "002", "DE.N.SFH.05.Gen.ReEx.001.002"),
    ("B3", "SFH07", "001", "DE.N.SFH.07.Gen.ReEx.001.001"),
    ("B4", "SFH07", "002", "DE.N.SFH.07.Gen.ReEx.001.002"),
]

KIND = {"roof": "roof", "wall": "wall", "wall2": "wall", "floor": "floor", "door": "wall"}
B_FACTOR = {"roof": 1.0, "wall": 1.0, "wall2": 1.0, "floor": 0.5, "door": 1.0, "window": 1.0}


def building(bid, typ, variant, label):
    t = TYPES[typ]
    v = t[variant]
    a_ref = t["reference_area"]
    surfaces = []
    h_tr = 0.0
    for part in ("roof", "wall", "wall2", "door", "floor"):
        area = round(t["ratios"][part] * a_ref, 3)
        if area == 0.0:
            continue
        surfaces.append({"name": part, "kind": KIND[part], "area_m2": area, "u_value": v[part]})
        h_tr += (B_FACTOR[part] * v[part] + DELTA_U_TBR) * area
    win = round(t["ratios"]["window"] * a_ref / 4, 3)
    for o in ("N", "E", "S", "W"):
        surfaces.append({"name": "window_" + o, "kind": "window", "area_m2": win, "u_value": v["window"],
                         "g_value": v["g"], "orientation": o})
        h_tr += (v["window"] + DELTA_U_TBR) * win
    h_ve = 0.34 * AIR_CHANGE * a_ref * ROOM_HEIGHT
    design = v["f_red"] * (h_tr + h_ve) * (SET_POINT_C + 12.0)
    cfg = {
        "id": bid,
        "label": label,
        "construction_class": "medium",
        "floor_area_m2": a_ref / t["storeys"],
        "storeys": t["storeys"],
        "f_red": v["f_red"],
        "delta_u_tbr": DELTA_U_TBR,
        "air_change_rate": AIR_CHANGE,
        "ceiling_height_m": ROOM_HEIGHT,
        "modules": {"radiator": 1, "ventilation": 1, "air_conditioner": 1, "appliances": 1,
                    "buffer_tank": 1, "dhw": 0, "pv": 0, "battery": 0, "heat_pump": 0},
        "surfaces": surfaces,
        "radiator": {"max_mass_flow_kg_s": round(design / (4186.0 * 20.0), 4),
                     "ua_w_per_k": round(design / 45.0, 1), "proportional_band_k": 2.0},
        "tank": {"water_mass_kg": 300.0, "initial_c": 80.0, "set_point_c": 80.0,
                 "band_low_c": 75.0, "band_high_c": 85.0, "ua_loss_w_per_k": 2.0},
        "ac": {"capacity_w": round(design, -2), "deadband_k": 0.5, "heating": 1, "cooling": 1},
    }
    degree_days = (SET_POINT_C - SEASON_MEAN_C) * SEASON_DAYS
    ref = {
        "id": bid,
        "source": "typology degree-day method, " + label,
        "mean_t_air_c": SET_POINT_C,
        "q_ht_tr_kwh": 0.024 * v["f_red"] * h_tr * degree_days,
        "q_ht_ven_kwh": 0.024 * v["f_red"] * h_ve * degree_days,
    }
    ref["q_ht_total_kwh"] = ref["q_ht_tr_kwh"] + ref["q_ht_ven_kwh"]
    return cfg, ref


TOPOLOGY = """# district4 heating network: one source, three junctions, four substations
node S  source      0   0
node J1 junction  140   0
node J2 junction  240   0
node J3 junction  320   0
node H1 substation 140  35 B1
node H2 substation 240 -30 B2
node H3 substation 320  25 B3
node H4 substation 360 -30 B4
# id  from to  length_m  u_prime_W_per_mK  diameter_m
pipe P1 S  J1 140 0.3 0.08
pipe P2 J1 H1  35 0.3 0.04
pipe P3 J1 J2 100 0.3 0.065
pipe P4 H2 J2  30 0.3 0.04
pipe P5 J2 J3  80 0.3 0.05
pipe P6 J3 H3  25 0.3 0.04
pipe P7 J3 H4  50 0.3 0.04
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[2] / "scenarios" / "district4"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20190101)

    temps, ghi, amp = weather(rng)
    with open(out / "weather.csv", "w", newline="\n") as f:
        f.write("timestamp,t_out_c,ghi_w_m2\n")
        for k in range(STEPS):
            f.write(f"{stamp(k)},{temps[k]:.2f},{ghi[k]:.1f}\n")

    cols = appliances(rng)
    with open(out / "appliances.csv", "w", newline="\n") as f:
        f.write("timestamp," + ",".join(a[0] for a in APPLIANCES) + "\n")
        for k in range(STEPS):
            f.write(stamp(k) + "," + ",".join(str(c[k]) for c in cols) + "\n")

    (out / "topology.txt").write_text(TOPOLOGY)

    configs, refs = zip(*(building(*b) for b in BUILDINGS))
    scenario = {
        "name": "district4",
        "files": {"weather": "weather.csv", "appliances": "appliances.csv", "topology": "topology.txt",
                  "references": "references.json"},
        "horizon": {"start_s": 0, "end_s": 365 * 86400, "dt_comm_s": STEP},
        "weather_target_mean_c": TARGET_MEAN_C,
        "set_point_c": SET_POINT_C,
        "heating_season": {"spring_end": "05-10", "autumn_start": "10-01"},
        "ground": {"mean_c": 10.0, "amplitude_k": 5.0, "phase_day": 210},
        "source": {"supply_c": 95.0, "dp_set_critical_pa": 50000, "max_head_pa": 1000000},
        "substation": {"delta_t1_k": 15.0, "buffer_set_c": 80.0, "supply_margin_k": 5.0, "substep_s": 60},
        "buildings": list(configs),
    }
    (out / "scenario.json").write_text(json.dumps(scenario, indent=2) + "\n")
    (out / "references.json").write_text(json.dumps({"records": list(refs)}, indent=2) + "\n")

    edges = []
    for bid, *_ in BUILDINGS:
        for port in ("T_sup", "m_flow", "T_ret_request"):
            edges.append([f"grid.{port}[{bid}]", f"{bid}.{port}"])
        for port in ("T_buffer", "Q_demand"):
            edges.append([f"{bid}.{port}", f"grid.{port}[{bid}]"])
    coupling = {"scenario": "scenario.json", "edges": edges, "remote": {}}
    (out / "coupling.json").write_text(json.dumps(coupling, indent=2) + "\n")
    print(f"wrote {out} (seasonal amplitude {amp:.3f} K)")


if __name__ == "__main__":
    main()
