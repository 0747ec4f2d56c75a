"""Command-line front end.

The CLI is a thin client of the verification service: every subcommand builds
a request, posts it to the FastAPI app (in-process by default, or to a remote
instance given with --server) and renders the response.  Exit codes: 0 when
every requested verdict holds, 1 when a verdict fails, 2 on input errors.
"""

from __future__ import annotations

import json
import os
import sys
from typing import Optional

import click
import httpx

DEFAULT_SEED = int(os.environ.get("JETSYM_SEED", "0"))


class Client:
    def __init__(self, server: Optional[str], as_json: bool):
        if server:
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            from .service import create_app

            transport = httpx.ASGITransport(app=create_app())
            self._client = httpx.Client(
                transport=transport, base_url="http://jetsym.local", timeout=600.0
            )
        self.as_json = as_json

    def call(self, method: str, path: str, payload: Optional[dict] = None) -> dict:
        response = self._client.request(method, path, json=payload)
        body = response.json()
        if response.status_code >= 400:
            message = body.get("message") or body.get("detail") or str(body)
            click.echo(f"error: {message}", err=True)
            sys.exit(2)
        return body


pass_client = click.make_pass_decorator(Client)


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Talk to a running service instead of the in-process app.")
@click.option("--json", "as_json", is_flag=True, help="Emit the structured JSON report.")
@click.pass_context
def main(ctx: click.Context, server: Optional[str], as_json: bool) -> None:
    """Verify Lie, conditional and hidden symmetries of PDEs on jet spaces."""
    ctx.obj = Client(server, as_json)


def _space_payload(space: Optional[str]):
    return space


def _emit(client: Client, body: dict) -> None:
    if client.as_json:
        click.echo(json.dumps(body, indent=2, sort_keys=True))


def _verdict_exit(client: Client, body: dict) -> None:
    _emit(client, body)
    if not client.as_json:
        holds = body["holds"]
        click.echo(f"verdict: {'holds' if holds else 'FAILS'}")
        if body.get("proper") is not None:
            click.echo(f"proper: {body['proper']}")
        click.echo(f"residual: {body['residual']}")
        for key, res in body.get("residuals", {}).items():
            if res != "0":
                click.echo(f"  residual[{key}]: {res}")
        for note in body.get("domain_notes", []):
            click.echo(f"note: valid off {{{note.replace(' != 0', ' = 0')}}}")
        for note in body.get("notes", []):
            click.echo(f"note: {note}")
    sys.exit(0 if body["holds"] else 1)


@main.command()
@click.argument("operator")
@click.option("--order", default=2, show_default=True)
@click.option("--space", default=None, help="Space declaration id, e.g. 'rotation'.")
@pass_client
def prolong(client: Client, operator: str, order: int, space: Optional[str]) -> None:
    """Prolong an operator and print its jet coefficients."""
    body = client.call("POST", "/prolong", {
        "operator": operator, "order": order, "space": _space_payload(space),
    })
    _emit(client, body)
    if not client.as_json:
        click.echo(f"operator: {body['operator']}")
        for coord, coeff in body["coefficients"].items():
            click.echo(f"  eta[{coord}] = {coeff}")
    sys.exit(0)


def _check_like(client: Client, endpoint: str, kind: str, operators: str,
                expression: str, conditions: Optional[str], space: Optional[str],
                extra: Optional[dict] = None) -> dict:
    payload = {
        "operators": [o.strip() for o in operators.split(",")],
        "expression": expression,
        "conditions": conditions,
        "space": _space_payload(space),
    }
    payload.update(extra or {})
    return client.call("POST", f"/{endpoint}/{kind}", payload)


@main.command()
@click.argument("kind", type=click.Choice(["lie", "qcond", "cond", "inv", "cdi"]))
@click.argument("operators")
@click.argument("expression")
@click.option("--given", "conditions", default=None,
              help="Condition set: 'G = 0, ... upto k' or @catalog/<id>.")
@click.option("--space", default=None)
@pass_client
def check(client: Client, kind: str, operators: str, expression: str,
          conditions: Optional[str], space: Optional[str]) -> None:
    """Run a symbolic invariance check.

    OPERATORS is DSL operator text or @catalog/<id> (comma separated for the
    multi-operator checks inv and cdi); EXPRESSION likewise."""
    body = _check_like(client, "check", kind, operators, expression, conditions, space)
    _verdict_exit(client, body)


@main.command()
@click.argument("kind", type=click.Choice(["lie", "qcond", "cond", "inv", "cdi"]))
@click.argument("operators")
@click.argument("expression")
@click.option("--given", "conditions", default=None)
@click.option("--space", default=None)
@click.option("--trials", default=20, show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--method", default="auto", type=click.Choice(["auto", "rk45", "closed"]))
@pass_client
def oracle(client: Client, kind: str, operators: str, expression: str,
           conditions: Optional[str], space: Optional[str], trials: int,
           seed: int, method: str) -> None:
    """Cross-check a symbolic verdict against the numeric flow oracle."""
    body = _check_like(client, "oracle", kind, operators, expression, conditions, space,
                       {"trials": trials, "seed": seed, "method": method})
    _emit(client, body)
    if not client.as_json:
        sym = body["symbolic"]["holds"]
        orc = body["oracle"]
        click.echo(f"symbolic: {'holds' if sym else 'FAILS'}")
        click.echo(
            f"oracle:   {'invariant' if orc['invariant'] else 'NOT invariant'} "
            f"(max deviation {orc['max_deviation']:.3e}, {orc['trials']} trials, "
            f"method {orc['method']})"
        )
        click.echo(f"agree: {body['agree']}")
    sys.exit(0 if body["symbolic"]["holds"] and body["agree"] else 1)


@main.command()
@click.argument("equation")
@click.option("--by", default=None, metavar="VAR", help="Translation direction to drop.")
@click.option("--ansatz", default=None,
              help="@catalog/<id> or payload 'r = expr | retain t | ...'.")
@click.option("--space", default=None)
@pass_client
def reduce(client: Client, equation: str, by: Optional[str], ansatz: Optional[str],
           space: Optional[str]) -> None:
    """Reduce an equation by a translation or an ansatz."""
    body = client.call("POST", "/reduce", {
        "equation": equation, "by": by, "ansatz": ansatz, "space": _space_payload(space),
    })
    _emit(client, body)
    if not client.as_json:
        if body["ok"]:
            click.echo(f"reduced: {body['reduced']}")
            for note in body.get("notes", []):
                click.echo(f"note: {note}")
        else:
            click.echo("NOT reducible; residual dependence:")
            for r in body["residuals"]:
                click.echo(f"  {r}")
    sys.exit(0 if body["ok"] else 1)


@main.command()
@click.argument("equation")
@click.option("--reduce-by", "reduce_by", default=None, metavar="VAR")
@click.option("--ansatz", default=None)
@click.option("--candidate", required=True)
@click.option("--space", default=None)
@pass_client
def hidden(client: Client, equation: str, reduce_by: Optional[str],
           ansatz: Optional[str], candidate: str, space: Optional[str]) -> None:
    """Check for hidden symmetry after a reduction."""
    body = client.call("POST", "/hidden", {
        "equation": equation, "reduce_by": reduce_by, "ansatz": ansatz,
        "candidate": candidate, "space": _space_payload(space),
    })
    _verdict_exit(client, body)


@main.command()
@click.argument("spec")
@pass_client
def pipeline(client: Client, spec: str) -> None:
    """Run a classification pipeline from a spec file or @catalog/<id>."""
    if not spec.startswith("@catalog/"):
        with open(spec, "r", encoding="utf-8") as fh:
            spec = fh.read()
    body = client.call("POST", "/pipeline", {"spec": spec})
    _emit(client, body)
    if not client.as_json:
        for row in body["rows"]:
            click.echo(f"member {row['member']} | reduction {row['reduction']}")
            if "error" in row:
                click.echo(f"  error: {row['error']}")
                continue
            click.echo(f"  reduced: {row['reduced']}")
            for cand in row.get("candidates", []):
                if "error" in cand:
                    click.echo(f"  candidate {cand['candidate']}: {cand['error']}")
                    continue
                click.echo(
                    f"  candidate {cand['candidate']}: reduced-invariance "
                    f"{'holds' if cand['lie_on_reduced'] else 'fails'}; "
                    f"constraint {cand['constraint']}; hidden {cand['hidden']}"
                )
            for tr in row.get("transforms", []):
                if "error" in tr:
                    click.echo(f"  transform {tr['transform']}: {tr['error']}")
                else:
                    click.echo(f"  transform {tr['transform']}: {tr['reduced_image']}"
                               f" lifts to {tr['lifted']}")
    sys.exit(0)


@main.group()
def catalog() -> None:
    """Inspect the registry of named operators, conditions and equations."""


@catalog.command("list")
@pass_client
def catalog_list(client: Client) -> None:
    body = client.call("GET", "/catalog")
    if client.as_json:
        click.echo(json.dumps(body, indent=2, sort_keys=True))
    else:
        for e in body:
            click.echo(f"{e['id']:32} {e['kind']:16} {e['anchor']}")
    sys.exit(0)


@catalog.command("show")
@click.argument("entry_id")
@pass_client
def catalog_show(client: Client, entry_id: str) -> None:
    body = client.call("GET", f"/catalog/{entry_id}")
    if client.as_json:
        click.echo(json.dumps(body, indent=2, sort_keys=True))
    else:
        click.echo(f"id:     {body['id']}")
        click.echo(f"kind:   {body['kind']}")
        click.echo(f"space:  {body['space']}")
        click.echo(f"anchor: {body['anchor']}")
        click.echo("payload:")
        for line in body["payload"].splitlines():
            click.echo(f"  {line}")
    sys.exit(0)


@main.command()
@click.argument("target", type=click.Choice(["paper"]))
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--trials", default=20, show_default=True)
@click.option("--method", default="auto", type=click.Choice(["auto", "rk45", "closed"]))
@pass_client
def suite(client: Client, target: str, seed: int, trials: int, method: str) -> None:
    """Run the full verification corpus (symbolic checks + numeric oracle)."""
    body = client.call("POST", "/suite/paper", {
        "seed": seed, "trials": trials, "method": method,
    })
    if client.as_json:
        click.echo(json.dumps(body, indent=2, sort_keys=True))
    else:
        click.echo(
            f"verification corpus  seed={body['seed']} trials={body['trials']} "
            f"method={body['method']}"
        )
        for row in body["rows"]:
            status = "pass" if row["pass"] else "FAIL"
            click.echo(
                f"{status}  {row['id']:42} symbolic={'holds' if row['symbolic'] else 'fails'}"
                f" oracle={'holds' if row['oracle'] else 'fails'} dev={row['deviation']}"
            )
        click.echo(
            f"TOTAL checks={body['checks']} agreements={body['agreements']} "
            f"passes={body['passes']}"
        )
    sys.exit(0 if body["all_pass"] else 1)


@main.command()
@click.argument("session_file", type=click.Path(exists=True))
@pass_client
def run(client: Client, session_file: str) -> None:
    """Execute a session file and report each command's verdict."""
    with open(session_file, "r", encoding="utf-8") as fh:
        text = fh.read()
    body = client.call("POST", "/session/run", {"text": text})
    _emit(client, body)
    if not client.as_json:
        for row in body["rows"]:
            verdict = row.get("verdict")
            if verdict is not None:
                click.echo(f"{'holds' if verdict['holds'] else 'FAILS'}  {row['command']}")
                if verdict["residual"] != "0":
                    click.echo(f"    residual: {verdict['residual']}")
            elif "reduced" in row:
                click.echo(f"reduced {row['command']} -> {row['reduced']}")
            else:
                click.echo(f"ran    {row['command']}")
    sys.exit(0 if body["ok"] else 1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Start the verification service."""
    import uvicorn

    uvicorn.run("jetsym.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
