"""Download the Stanford bunny scan for the registration demo.

The registration tests and demo run offline against the committed
data/standin_cloud.xyz.  If you want the classic bunny instead, this script
fetches the reconstruction from the Stanford 3D Scanning Repository and
extracts the zipper-reconstruction PLY to data/bunny.ply.  Network access
required; nothing in the test suite depends on this file.

Usage: python3 scripts/fetch_bunny.py
Then:  rotavg register data/bunny.ply --outlier-fraction 0.9 --seed 0
"""

from __future__ import annotations

import io
import os
import tarfile
import urllib.request

URL = "http://graphics.stanford.edu/pub/3Dscanrep/bunny.tar.gz"
MEMBER = "bunny/reconstruction/bun_zipper.ply"


def main() -> None:
    out_dir = os.path.normpath(os.path.join(os.path.dirname(__file__), "..", "data"))
    os.makedirs(out_dir, exist_ok=True)
    out_path = os.path.join(out_dir, "bunny.ply")
    print(f"fetching {URL} ...")
    with urllib.request.urlopen(URL) as resp:
        blob = resp.read()
    with tarfile.open(fileobj=io.BytesIO(blob), mode="r:gz") as tar:
        member = tar.extractfile(MEMBER)
        if member is None:
            raise RuntimeError(f"{MEMBER} not found in archive")
        data = member.read()
    with open(out_path, "wb") as fh:
        fh.write(data)
    print(f"wrote {out_path} ({len(data)} bytes)")


if __name__ == "__main__":
    main()
