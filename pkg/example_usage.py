#!/usr/bin/env python3
"""
Example usage of the clustering API.
Start the server first (python start_server.py), then run this script.
"""

import json

import httpx

BASE_URL = "http://localhost:8000"


def print_response(title: str, response):
    print(f"\n{'=' * 50}")
    print(title)
    print(f"{'=' * 50}")
    print(f"Status Code: {response.status_code}")
    if response.headers.get("content-type", "").startswith("application/json"):
        print(f"Response: {json.dumps(response.json(), indent=2)}")
    else:
        print(f"Response: {response.text}")


def main():
    print("Correlation Clustering Query API example")

    with httpx.Client(base_url=BASE_URL, timeout=60.0) as client:
        try:
            print_response("Health Check", client.get("/health"))
            print_response("Algorithms", client.get("/algorithms"))

            # A small planted instance: family S with model II noise
            response = client.post(
                "/instances",
                json={"family": {"family": "S", "seed": 7}, "noise": {"model": "II", "flip_budget": 20, "seed": 7}},
            )
            print_response("Planted Instance (summary)", response)
            instance = response.json()
            graph = {"n": instance["n"], "plus_edges": instance["plus_edges"]}

            # Triangle-shaped toy graph: 0-1 and 1-2 are +, 0-2 is -
            toy = {"n": 3, "plus_edges": [[0, 1], [1, 2]]}
            response = client.post("/runs", json={"graph": toy, "algorithm": "qp", "oracle": "opt"})
            print_response("QueryPivot with the optimal oracle", response)
            toy_run_id = response.json().get("run_id")

            response = client.post(
                "/runs",
                json={"graph": graph, "algorithm": "rqp", "oracle": "truth", "truth": instance["truth"], "p": 0.25, "seed": 1},
            )
            print_response("RandomQueryPivot(0.25) with the ground-truth oracle", response)

            response = client.post(
                "/runs",
                json={
                    "graph": graph,
                    "algorithm": "qp",
                    "oracle": "noisy",
                    "truth": instance["truth"],
                    "error_rate": 0.1,
                    "votes": 5,
                    "seed": 3,
                },
            )
            print_response("QueryPivot with a noisy crowd oracle", response)

            response = client.post("/runs", json={"graph": graph, "algorithm": "acn", "seed": 1})
            print_response("ACN pivot (no queries)", response)

            print_response("All Runs", client.get("/runs"))
            if toy_run_id:
                print_response("Delete Toy Run", client.delete(f"/runs/{toy_run_id}"))

            # Rejected: even number of votes
            response = client.post(
                "/runs", json={"graph": toy, "algorithm": "qp", "oracle": "noisy", "truth": [0, 0, 1], "votes": 4}
            )
            print_response("Invalid Run (even votes)", response)

        except httpx.ConnectError:
            print("\nError: could not connect to the API server.")
            print("Start it with: python start_server.py")


if __name__ == "__main__":
    main()
