"""Command line client for batch planning studies.

Subcommands: ``plan``, ``baseline``, ``validate``, ``ahp``, ``gen-fixture``
and ``serve``.  File handling lives here; all computation goes through the
service layer (in process by default, or a remote instance via --server).

Exit codes: 0 success, 1 validation failed, 2 no feasible location,
3 input/output failure, 4 configuration error.  Set CESPLAN_LOG_LEVEL to
adjust logging.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import AllLocationsInfeasible, CesplanError, SlackLocation
from . import scenario as sc
from .service import schemas as sm
from .service.client import RemoteServiceError, ServiceClient

logger = logging.getLogger("cesplan")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3
EXIT_CONFIG = 4

LEADERBOARD_COLUMNS = [
    "schema_version",
    "location",
    "feasible",
    "e_cap_kwh",
    "p_rate_kw",
    "loss_kwh",
    "loss_pct_of_baseline",
    "trade_aud",
    "trade_pct_of_baseline",
    "invest_aud",
    "weighted_objective",
    "reason",
]


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("CESPLAN_LOG_LEVEL", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AllLocationsInfeasible as exc:
        print(f"error: no feasible location: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except RemoteServiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if (exc.status_code or 0) in (400, 422) else EXIT_IO
    except (CesplanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cesplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_inputs(p):
        p.add_argument("--network", required=True, help="network CSV (from,to,r_ohm,x_ohm)")
        p.add_argument("--profiles", required=True, help="customer profiles CSV")
        p.add_argument("--tariff", required=True, help="tariff CSV or ToU JSON")
        p.add_argument("--config", required=True, help="study config JSON")
        p.add_argument("--horizon", type=int, default=None, help="truncate to the first N hours")
        p.add_argument("--server", default=None, help="base URL of a running service")

    p_plan = sub.add_parser("plan", help="run the full siting and scheduling study")
    add_inputs(p_plan)
    p_plan.add_argument("--out", default="out", help="output directory")
    p_plan.add_argument("--weights", default=None, help="explicit weights, e.g. 1/9,4/9,4/9")
    p_plan.add_argument("--ahp-file", default=None, help="JSON pairwise comparison matrix")
    p_plan.add_argument("--fixed-location", type=int, default=None, help="skip enumeration, use this node")
    p_plan.add_argument(
        "--normalization", choices=("per_location", "global"), default="per_location"
    )
    p_plan.set_defaults(handler=cmd_plan)

    p_base = sub.add_parser("baseline", help="evaluate the network without storage")
    add_inputs(p_base)
    p_base.add_argument("--out", default="out", help="output directory")
    p_base.set_defaults(handler=cmd_baseline)

    p_val = sub.add_parser("validate", help="replay a plan against the scenario")
    add_inputs(p_val)
    p_val.add_argument("--plan", required=True, help="plan.json produced by the plan command")
    p_val.set_defaults(handler=cmd_validate)

    p_ahp = sub.add_parser("ahp", help="weights from a pairwise comparison matrix")
    p_ahp.add_argument("--ahp-file", required=True, help="JSON matrix or {'matrix': ...}")
    p_ahp.add_argument("--server", default=None)
    p_ahp.set_defaults(handler=cmd_ahp)

    p_fix = sub.add_parser("gen-fixture", help="write the bundled synthetic study")
    p_fix.add_argument("--out", default="fixture", help="output directory")
    p_fix.add_argument("--seed", type=int, default=0)
    p_fix.add_argument("--days", type=int, default=7)
    p_fix.add_argument("--customers", type=int, default=30)
    p_fix.add_argument("--server", default=None)
    p_fix.set_defaults(handler=cmd_gen_fixture)

    p_srv = sub.add_parser("serve", help="run the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.set_defaults(handler=cmd_serve)

    return parser


def make_client(args) -> ServiceClient:
    return ServiceClient(base_url=getattr(args, "server", None))


def parse_weights(text: str) -> list[float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError("--weights needs three comma-separated values")
    return [float(Fraction(p)) for p in parts]


def read_ahp_matrix(path) -> list[list[float]]:
    payload = json.loads(Path(path).read_text())
    matrix = payload.get("matrix") if isinstance(payload, dict) else payload
    if not isinstance(matrix, list):
        raise ValueError("AHP file must hold a matrix or {'matrix': ...}")
    return [[float(v) for v in row] for row in matrix]


def scenario_payload_from_files(args) -> sm.ScenarioPayload:
    """Assemble the request payload from the documented input files."""
    lines = sc.parse_network_csv(Path(args.network).read_text())
    raw_customers = sc.parse_profiles_csv(Path(args.profiles).read_text())
    tariff = sc.parse_tariff_file(Path(args.tariff))
    try:
        config = json.loads(Path(args.config).read_text())
    except json.JSONDecodeError as exc:
        raise sc.ParseError(f"config is not valid JSON: {exc}") from exc

    steps = int(config["horizon"]["steps"]) if "horizon" in config else None
    if args.horizon is not None:
        steps = args.horizon
        raw_customers = [
            {
                **c,
                **{
                    col: c[col][:steps]
                    for col in ("p_load_kw", "q_load_kvar", "p_pv_kw")
                },
            }
            for c in raw_customers
        ]
    if steps is None:
        raise sc.ParseError("config horizon.steps missing and --horizon not given")

    horizon = sm.HorizonPayload(
        steps=steps, dt_hours=float(config.get("horizon", {}).get("dt_hours", 1.0))
    )
    weights_cfg = config.get("weights")
    return sm.ScenarioPayload(
        network=sm.NetworkPayload(
            lines=[
                sm.LinePayload(from_node=a, to_node=b, r_ohm=r, x_ohm=x)
                for a, b, r, x in lines
            ],
            voltage_base_v=float(config["voltage_base_v"]),
            u0_pu=float(config["u0_pu"]),
            u_min_pu=float(config["u_min_pu"]),
            u_max_pu=float(config["u_max_pu"]),
        ),
        customers=[sm.CustomerPayload(**c) for c in raw_customers],
        tariff=sm.TariffPayload(hourly_price=tariff.hourly_price.tolist()),
        horizon=horizon,
        ces=sm.CesPayload(**config.get("ces", {})),
        weights=sm.WeightsPayload(**weights_cfg) if weights_cfg else None,
        solver=config.get("solver"),
    )


def cmd_plan(args) -> int:
    if args.weights is not None and args.ahp_file is not None:
        print("error: give either --weights or --ahp-file, not both", file=sys.stderr)
        return EXIT_CONFIG
    client = make_client(args)
    scenario = scenario_payload_from_files(args)

    weights = None
    if args.weights is not None:
        weights = parse_weights(args.weights)
    elif args.ahp_file is not None:
        ahp = client.ahp(sm.AhpRequest(matrix=read_ahp_matrix(args.ahp_file)))
        weights = ahp.weights

    if args.fixed_location is not None and not (
        1 <= args.fixed_location <= max(ln.to_node for ln in scenario.network.lines)
    ):
        raise SlackLocation(f"--fixed-location {args.fixed_location} is not a non-slack node")

    response = client.plan(
        sm.PlanRequest(
            scenario=scenario,
            weights=weights,
            fixed_location=args.fixed_location,
            normalization=args.normalization,
        )
    )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "plan.json").write_text(
        json.dumps(response.model_dump(mode="json"), indent=2) + "\n"
    )
    write_leaderboard_csv(response, out / "leaderboard.csv")
    write_timeseries(response, out / "timeseries")
    print_plan_summary(response)
    print(f"outputs written to {out}")
    return EXIT_OK


def write_leaderboard_csv(response: sm.PlanResponse, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=LEADERBOARD_COLUMNS)
        writer.writeheader()
        for row in response.leaderboard:
            loss_pct = (
                100.0 * row.loss_kwh / response.baseline.loss_kwh
                if row.feasible and response.baseline.loss_kwh
                else ""
            )
            trade_pct = (
                100.0 * row.trade_aud / response.baseline.trade_aud
                if row.feasible and response.baseline.trade_aud
                else ""
            )
            writer.writerow(
                {
                    "schema_version": response.schema_version,
                    "location": row.location,
                    "feasible": row.feasible,
                    "e_cap_kwh": row.e_cap_kwh if row.feasible else "",
                    "p_rate_kw": row.p_rate_kw if row.feasible else "",
                    "loss_kwh": row.loss_kwh if row.feasible else "",
                    "loss_pct_of_baseline": loss_pct,
                    "trade_aud": row.trade_aud if row.feasible else "",
                    "trade_pct_of_baseline": trade_pct,
                    "invest_aud": row.invest_aud if row.feasible else "",
                    "weighted_objective": row.weighted_objective if row.feasible else "",
                    "reason": row.reason,
                }
            )


def write_timeseries(response: sm.PlanResponse, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    sch = response.schedule
    steps = len(sch.charge_kw)
    customers_grid = [
        sum(series[t] for series in sch.grid_customer_kw) for t in range(steps)
    ]
    customers_ces = [
        sum(series[t] for series in sch.ces_customer_kw) for t in range(steps)
    ]

    def write(name, header, rows):
        with open(out / name, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)

    write("customers_grid.csv", ["t", "total_kw"], list(enumerate(customers_grid)))
    write("customers_ces.csv", ["t", "total_kw"], list(enumerate(customers_ces)))
    write("ces_grid.csv", ["t", "kw"], list(enumerate(sch.grid_ces_kw)))
    write(
        "ces_charge_discharge.csv",
        ["t", "charge_kw", "discharge_kw"],
        [(t, sch.charge_kw[t], sch.discharge_kw[t]) for t in range(steps)],
    )
    write("ces_energy.csv", ["t", "energy_kwh"], list(enumerate(sch.energy_kwh)))


def print_plan_summary(response: sm.PlanResponse) -> None:
    obj = response.objectives
    base = response.baseline
    print(
        f"chosen location: node {response.location}  "
        f"capacity {response.design.e_cap_kwh:.2f} kWh  "
        f"rating {response.design.p_rate_kw:.2f} kW"
    )
    print(f"{'case':<16}{'node':>5}{'e_cap_kwh':>12}{'loss_kwh':>12}{'loss%':>9}"
          f"{'trade_aud':>12}{'trade%':>9}{'invest_aud':>12}")
    print(f"{'baseline':<16}{'-':>5}{'-':>12}{base.loss_kwh:>12.2f}{'':>9}"
          f"{base.trade_aud:>12.2f}{'':>9}{'-':>12}")
    for row in response.leaderboard:
        if not row.feasible:
            print(f"{'candidate':<16}{row.location:>5}  infeasible: {row.reason}")
            continue
        tag = "chosen" if row.location == response.location else "candidate"
        loss_pct = 100.0 * row.loss_kwh / base.loss_kwh if base.loss_kwh else float("nan")
        trade_pct = 100.0 * row.trade_aud / base.trade_aud if base.trade_aud else float("nan")
        print(
            f"{tag:<16}{row.location:>5}{row.e_cap_kwh:>12.2f}{row.loss_kwh:>12.2f}"
            f"{loss_pct:>8.2f}%{row.trade_aud:>12.2f}{trade_pct:>8.2f}%{row.invest_aud:>12.0f}"
        )
    print(
        f"weighted objective {obj.weighted_normalized:.6f} with weights "
        f"{', '.join(f'{w:.4f}' for w in response.weights)} ({response.normalization})"
    )


def cmd_baseline(args) -> int:
    client = make_client(args)
    scenario = scenario_payload_from_files(args)
    response = client.baseline(sm.BaselineRequest(scenario=scenario))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "baseline.json").write_text(
        json.dumps(response.model_dump(mode="json"), indent=2) + "\n"
    )
    print(f"baseline loss {response.loss_kwh:.2f} kWh, trade {response.trade_aud:.2f} AUD")
    print(f"outputs written to {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    client = make_client(args)
    scenario = scenario_payload_from_files(args)
    plan_doc = json.loads(Path(args.plan).read_text())
    try:
        plan_response = sm.PlanResponse.model_validate(plan_doc)
    except Exception as exc:
        print(f"error: plan file not readable as a plan document: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    request = sm.ValidateRequest(
        scenario=scenario,
        design=plan_response.design,
        schedule=plan_response.schedule,
        reported_objectives=[
            plan_response.objectives.loss_kw_steps,
            plan_response.objectives.trade_aud,
            plan_response.objectives.invest_aud,
        ],
    )
    response = client.validate(request)
    for check in response.checks:
        state = "ok" if check.passed else "VIOLATED"
        print(f"{check.name:<22} max violation {check.max_violation:.3e}  {state}")
    for name, value in response.flags.items():
        print(f"flag {name}: {value}")
    print(f"objective mismatch (relative): {response.objective_mismatch_rel:.3e}")
    print("validation PASSED" if response.passed else "validation FAILED")
    return EXIT_OK if response.passed else EXIT_VALIDATION


def cmd_ahp(args) -> int:
    client = make_client(args)
    response = client.ahp(sm.AhpRequest(matrix=read_ahp_matrix(args.ahp_file)))
    print("weights:", ", ".join(f"{w:.6f}" for w in response.weights))
    print(f"lambda_max: {response.lambda_max:.6f}")
    print(f"consistency ratio: {response.consistency_ratio:.6f}")
    return EXIT_OK


def cmd_gen_fixture(args) -> int:
    client = make_client(args)
    response = client.fixture(
        sm.FixtureRequest(seed=args.seed, days=args.days, customers=args.customers)
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = response.scenario

    sc.write_network_csv(
        [(ln.from_node, ln.to_node, ln.r_ohm, ln.x_ohm) for ln in payload.network.lines],
        out / "network.csv",
    )
    customers = [
        sc.CustomerProfile(
            node=c.node,
            key=c.customer,
            p_load=np.asarray(c.p_load_kw),
            q_load=np.asarray(c.q_load_kvar or [0.0] * len(c.p_load_kw)),
            p_pv=np.asarray(c.p_pv_kw or [0.0] * len(c.p_load_kw)),
        )
        for c in payload.customers
    ]
    sc.write_profiles_csv(customers, out / "profiles.csv")
    sc.write_tariff_json(
        [(w.start_hour, w.end_hour, w.price_aud_per_kwh) for w in payload.tariff.windows],
        out / "tariff.json",
    )
    config = {
        "voltage_base_v": payload.network.voltage_base_v,
        "u0_pu": payload.network.u0_pu,
        "u_min_pu": payload.network.u_min_pu,
        "u_max_pu": payload.network.u_max_pu,
        "horizon": payload.horizon.model_dump(),
        "ces": payload.ces.model_dump(exclude_none=True),
        "weights": payload.weights.model_dump(exclude_none=True) if payload.weights else None,
        "seed": response.seed,
    }
    config = {k: v for k, v in config.items() if v is not None}
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")
    print(f"fixture written to {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
