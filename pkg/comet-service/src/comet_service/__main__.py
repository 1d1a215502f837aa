"""Run the service: python -m comet_service [--host H] [--port P].

Checkpoint comes from COMET_CHECKPOINT (default Unbabel/wmt22-comet-da;
"stub" for the deterministic stand-in).
"""

import argparse
import os

import uvicorn

from .app import create_app


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--host", default=os.environ.get("COMET_HOST", "127.0.0.1"))
    parser.add_argument("--port", type=int, default=int(os.environ.get("COMET_PORT", "8100")))
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()
    uvicorn.run(create_app(), host=args.host, port=args.port, workers=args.workers)


if __name__ == "__main__":
    main()
