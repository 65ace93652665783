"""Command-line interface: run the gateway, pack package trees, submit
archives and fetch reports.

Exit codes: 0 success, 1 remote/API error, 2 usage error.
"""
from __future__ import annotations

import json
import socket
import sys
import urllib.error
import urllib.request

import click

from .archive import pack_directory
from .errors import XAppStoreError


@click.group()
def main():
    """xApp store service and client tools."""


@main.command()
@click.option("--port", type=int, default=8080, show_default=True,
              help="TCP port; 0 binds an ephemeral port.")
@click.option("--data-dir", type=click.Path(), default=None,
              help="Persistence directory (in-memory when omitted).")
@click.option("--tick-ms", type=int, default=1000, show_default=True,
              help="Logical tick for acceptance and live scenarios.")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port, data_dir, tick_ms, seed, host):
    """Run the gateway. The bound port is printed on stdout line 1."""
    import uvicorn

    from .gateway import create_app, default_static_dir
    from .scenario import ScenarioConfig
    from .service import XAppStoreService, builtin_scenario

    try:
        scenario = builtin_scenario("two-gnb-crossing")
        doc = json.loads(json.dumps({
            "seed": seed, "tick_ms": tick_ms,
            "arena": {"width_m": scenario.arena[0], "height_m": scenario.arena[1]},
            "gnbs": [{"id": g.id, "position": {"x_m": g.x_m, "y_m": g.y_m},
                      "tx_power_dbm": g.tx_power_dbm} for g in scenario.gnbs],
            "ues": [{"id": u.id,
                     "start": {"x_m": u.start[0], "y_m": u.start[1]},
                     "waypoints": [{"x_m": w[0], "y_m": w[1]}
                                   for w in u.waypoints],
                     "speed_mps": u.speed_mps} for u in scenario.ues],
        }))
        svc = XAppStoreService(
            data_dir=data_dir,
            acceptance_scenario=ScenarioConfig.from_dict(doc))
    except XAppStoreError as e:
        click.echo(f"startup failed: {e.code}: {e.detail}", err=True)
        sys.exit(1)

    app = create_app(svc, static_dir=default_static_dir())
    sock = socket.create_server((host, port))
    bound_port = sock.getsockname()[1]
    click.echo(str(bound_port))
    sys.stdout.flush()
    config = uvicorn.Config(app, log_level="warning")
    uvicorn.Server(config).run(sockets=[sock])


@main.command()
@click.argument("source_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", "-o", type=click.Path(), required=True,
              help="Output archive path (.xapp).")
def pack(source_dir, out):
    """Build a package archive from a directory tree holding manifest.json,
    behavior.json and optional assets/."""
    try:
        data = pack_directory(source_dir)
    except XAppStoreError as e:
        click.echo(f"{e.code}: {e.detail}", err=True)
        sys.exit(1)
    with open(out, "wb") as f:
        f.write(data)
    click.echo(out)


def _request(url, data=None, method=None):
    req = urllib.request.Request(url, data=data, method=method)
    if data is not None:
        req.add_header("Content-Type", "application/octet-stream")
    try:
        with urllib.request.urlopen(req, timeout=30) as resp:
            return json.loads(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as e:
        try:
            body = json.loads(e.read().decode("utf-8"))
            code, detail = body.get("code", "HTTP_ERROR"), body.get("detail", "")
        except Exception:
            code, detail = "HTTP_ERROR", str(e)
        click.echo(f"{e.code} {code}: {detail}", err=True)
        sys.exit(1)
    except urllib.error.URLError as e:
        click.echo(f"cannot reach server: {e.reason}", err=True)
        sys.exit(1)


@main.command()
@click.argument("archive_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--server", default="http://127.0.0.1:8080", show_default=True)
def submit(archive_path, server):
    """Upload a package archive; prints the record id."""
    with open(archive_path, "rb") as f:
        body = _request(f"{server}/xapps", data=f.read(), method="POST")
    click.echo(body["id"])


@main.command()
@click.argument("record_id")
@click.option("--server", default="http://127.0.0.1:8080", show_default=True)
def report(record_id, server):
    """Pretty-print the latest conformance report for a record."""
    body = _request(f"{server}/xapps/{record_id}/report")
    click.echo(f"report {body['report_id']} for {body['record_id']}: "
               f"{body['verdict']}")
    for check in body["checks"]:
        click.echo(f"  [{check['severity']:>7}] {check['code']}: {check['detail']}")
        for ev in check.get("evidence", []):
            click.echo(f"            evidence: {json.dumps(ev, sort_keys=True)}")


if __name__ == "__main__":
    main()
