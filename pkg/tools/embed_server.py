"""Minimal embedding service for keyword extraction on real data.

Serves POST {"text": ...} -> {"vector": [...]} from a sentence-transformers
model.  Needs ``sentence-transformers`` (not a package dependency).

    python tools/embed_server.py --model distilbert-base-nli-stsb-mean-tokens --port 8765
    export TRIALRANK_EMBED_URL=http://127.0.0.1:8765/embed
"""
import argparse
import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from sentence_transformers import SentenceTransformer


def make_handler(model, lock):
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            try:
                text = json.loads(self.rfile.read(int(self.headers["Content-Length"])))["text"]
            except (ValueError, KeyError, TypeError):
                self.send_error(400, "expected {\"text\": ...}")
                return
            with lock:
                vec = model.encode([text])[0].tolist()
            body = json.dumps({"vector": vec}).encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, fmt, *args):
            logging.debug(fmt, *args)

    return Handler


def main():
    p = argparse.ArgumentParser(description="sentence embedding HTTP service")
    p.add_argument("--model", default="distilbert-base-nli-stsb-mean-tokens")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO)
    model = SentenceTransformer(args.model)
    server = ThreadingHTTPServer((args.host, args.port), make_handler(model, threading.Lock()))
    logging.info("serving %s on http://%s:%d/embed", args.model, args.host, args.port)
    server.serve_forever()


if __name__ == "__main__":
    main()
