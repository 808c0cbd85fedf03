#!/usr/bin/env python3
"""Minimal JSON-lines scorer bridge for exercising the client.

Scores are affine in the hypothesis token count (0.25 * len + 0.125 by
default). Failure modes simulate misbehaving bridges:

  ok          well-behaved
  short       drops the last score from each response
  badjson     responds with a non-JSON line
  wrongid     responds with id + 1000
  error       responds {"id", "error": ...}
  die-after-1 exits after serving one request
"""

from __future__ import annotations

import argparse
import json
import socket
import sys


def handle(line: str, mode: str, scale: float, offset: float) -> tuple[str, bool]:
    req = json.loads(line)
    scores = [scale * len(p["hyp"].split()) + offset for p in req["pairs"]]
    if mode == "short":
        scores = scores[:-1]
    if mode == "badjson":
        return "this is not json", False
    if mode == "wrongid":
        return json.dumps({"id": req["id"] + 1000, "scores": scores}), False
    if mode == "error":
        return json.dumps({"id": req["id"], "error": "synthetic failure"}), False
    return json.dumps({"id": req["id"], "scores": scores}), mode == "die-after-1"


def serve_stdio(args) -> None:
    for line in sys.stdin:
        if not line.strip():
            continue
        response, stop = handle(line, args.mode, args.scale, args.offset)
        print(response, flush=True)
        if stop:
            return


def serve_tcp(args) -> None:
    server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    server.bind(("127.0.0.1", args.port))
    server.listen(1)
    while True:  # serve connections until killed (probes may connect first)
        conn, _ = server.accept()
        reader = conn.makefile("r", encoding="utf-8")
        writer = conn.makefile("w", encoding="utf-8")
        stop = False
        for line in reader:
            if not line.strip():
                continue
            response, stop = handle(line, args.mode, args.scale, args.offset)
            writer.write(response + "\n")
            writer.flush()
            if stop:
                break
        conn.close()
        if stop:
            break
    server.close()


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--mode", default="ok")
    parser.add_argument("--scale", type=float, default=0.25)
    parser.add_argument("--offset", type=float, default=0.125)
    parser.add_argument("--tcp-port", type=int, default=0)
    args = parser.parse_args()
    args.port = args.tcp_port
    if args.tcp_port:
        serve_tcp(args)
    else:
        serve_stdio(args)


if __name__ == "__main__":
    main()
