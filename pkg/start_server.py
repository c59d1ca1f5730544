#!/usr/bin/env python3
"""
Start the clustering service with uvicorn.
"""

import argparse
import subprocess
import sys


def main():
    """Run main:app under uvicorn inside the project environment."""
    parser = argparse.ArgumentParser(description="Start the correlation clustering API")
    parser.add_argument("--host", default="0.0.0.0")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--no-reload", action="store_true", help="Disable auto-reload")
    args = parser.parse_args()

    print("Starting Correlation Clustering Query API...")
    print(f"Docs: http://localhost:{args.port}/docs")
    print("Press Ctrl+C to stop the server\n")

    cmd = ["uv", "run", "uvicorn", "main:app", "--host", args.host, "--port", str(args.port)]
    if not args.no_reload:
        cmd.append("--reload")
    try:
        subprocess.run(cmd, check=True)
    except subprocess.CalledProcessError as e:
        print(f"Error starting server: {e}")
        sys.exit(1)
    except KeyboardInterrupt:
        print("\nServer stopped")
        sys.exit(0)


if __name__ == "__main__":
    main()
