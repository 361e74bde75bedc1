#!/usr/bin/env python3
"""Download the barro growth data (quantreg) and write it as CSV.

The data ships inside the `rdatasets` wheel on PyPI. Usage:

    python3 tools/fetch_barro.py [output.csv]

Default output is data/barro.csv next to this repository's root.
"""

import glob
import io
import lzma
import os
import pickle
import subprocess
import sys
import tempfile
import zipfile

COLUMNS = ["y.net", "lgdp2", "mse2", "fse2", "fhe2", "mhe2", "lexp2", "lintr2",
           "gedy2", "Iy2", "gcony2", "lblakp2", "pol2", "ttrad2"]


def main():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(root, "data", "barro.csv")
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps",
                        "--only-binary=:all:", "-d", tmp, "rdatasets"], check=True,
                       stdout=subprocess.DEVNULL)
        wheel = glob.glob(os.path.join(tmp, "rdatasets-*.whl"))[0]
        with zipfile.ZipFile(wheel) as zf:
            name = next(n for n in zf.namelist() if n.endswith("quantreg/barro.pkl.compress"))
            frame = pickle.load(io.BytesIO(lzma.decompress(zf.read(name))))
    frame = frame[COLUMNS]
    if frame.shape != (161, 14):
        sys.exit(f"unexpected barro shape {frame.shape}")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    frame.to_csv(out, index=False, float_format="%.17g")
    print(f"wrote {out}: {frame.shape[0]} rows")


if __name__ == "__main__":
    main()
