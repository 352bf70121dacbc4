"""Deterministic stand-in bridge for exercising the NDJSON client.

Options:
  --d-e N          declared embedding width (default 16)
  --bad-shape      encode replies with one row too few
  --wrong-id       replies carry a different id
  --fail-on TEXT   encode/generate requests whose text contains TEXT get an error frame
  --exit-after N   exit after answering N requests (hello included)
"""
import argparse
import json
import sys
import zlib


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d-e", type=int, default=16)
    ap.add_argument("--bad-shape", action="store_true")
    ap.add_argument("--wrong-id", action="store_true")
    ap.add_argument("--fail-on", default=None)
    ap.add_argument("--exit-after", type=int, default=-1)
    args = ap.parse_args()

    answered = 0
    for line in sys.stdin:
        if args.exit_after >= 0 and answered >= args.exit_after:
            return
        try:
            req = json.loads(line)
        except ValueError:
            reply = {"type": "error", "id": None, "message": "malformed request"}
        else:
            rid = req.get("id")
            out_id = (rid + "-x") if (args.wrong_id and rid is not None) else rid
            kind = req.get("type")
            payload = req.get("text", req.get("instruction", ""))
            if args.fail_on and args.fail_on in payload:
                reply = {"type": "error", "id": rid, "message": "refused"}
            elif kind == "hello":
                reply = {"type": "hello", "model": "fake-bridge", "d_e": args.d_e}
            elif kind == "encode":
                rows = req["d_m"] - (1 if args.bad_shape else 0)
                seed = zlib.crc32(req["text"].encode())
                tokens = [[((seed + 31 * r + c) % 97) / 97.0 - 0.5 for c in range(args.d_e)] for r in range(rows)]
                reply = {"type": "memory", "id": out_id, "tokens": tokens}
            elif kind == "generate":
                words = req["instruction"].split()[:4]
                reply = {"type": "text", "id": out_id, "text": " ".join(words) + f" rows{len(req['memory'])}"}
            else:
                reply = {"type": "error", "id": rid, "message": f"unknown type {kind!r}"}
        sys.stdout.write(json.dumps(reply) + "\n")
        sys.stdout.flush()
        answered += 1


if __name__ == "__main__":
    main()
