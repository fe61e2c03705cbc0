"""
Annotation service walkthrough
==============================

Drives the HTTP annotation API in-process: open a session on a dataset
item, predict from click prompts, commit per-class masks, undo, and
export a label image that round-trips through the dataset loader.

For a real deployment run ``eyeseg serve --backend mock --data <root>``
and point the browser frontend at it.
"""

import base64
import io
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient
from PIL import Image

from eyeseg.backends import MockBackend
from eyeseg.datasets import load_dataset
from eyeseg.rle import decode_mask
from eyeseg.service import create_app
from eyeseg.synthetic import write_synthetic_dataset

out_root = Path(__file__).parent / "output" / "annotation"
data_root = write_synthetic_dataset(out_root / "data", count=3, seed=8)

manifest = load_dataset(data_root, "generic-folder")
client = TestClient(create_app(backend=MockBackend(radius=10), manifest=manifest))

# Open a session on the first dataset item; the embedding is computed
# eagerly so the first predict is fast.
session = client.post("/sessions", json={"item_id": "eye_0000"}).json()
sid = session["session_id"]
print(f"session {sid[:8]}… on eye_0000 ({session['width']}x{session['height']})")

# A foreground click near the pupil: the mock backend answers with a
# disk around the click. Prompts are stateless, the client resends the
# full set on every edit.
click = {"points": [{"x": 80, "y": 50, "label": 1}], "class": "pupil"}
reply = client.post(f"/sessions/{sid}/predict", json=click).json()
mask = decode_mask(reply["mask"])
print(f"predicted pupil mask: {int(mask.sum())} px, score {reply['score']}")

# Commit it, then annotate the iris with a second click.
client.post(f"/sessions/{sid}/commit", json={"class": "pupil", "mask": reply["mask"], "prompts": click})
iris_click = {"points": [{"x": 84, "y": 52, "label": 1}], "class": "iris"}
iris_reply = client.post(f"/sessions/{sid}/predict", json=iris_click).json()
client.post(f"/sessions/{sid}/commit", json={"class": "iris", "mask": iris_reply["mask"], "prompts": iris_click})

# Export: pupil wins overlapping pixels because inner features take
# priority over outer ones.
export = client.get(f"/sessions/{sid}/export").json()
labels = np.asarray(Image.open(io.BytesIO(base64.b64decode(export["label_image_b64"]))))
values, counts = np.unique(labels, return_counts=True)
print("exported classes:", dict(zip(values.tolist(), counts.tolist())))
print("provenance:", [entry["class"] for entry in export["provenance"]])

# The export is a normal label image: write it next to the source frame
# and reload it through the dataset module.
annotated = out_root / "annotated"
(annotated / "images").mkdir(parents=True, exist_ok=True)
(annotated / "labels").mkdir(parents=True, exist_ok=True)
image_png = client.get(f"/sessions/{sid}/image").content
(annotated / "images" / "eye_0000.png").write_bytes(image_png)
(annotated / "labels" / "eye_0000.png").write_bytes(base64.b64decode(export["label_image_b64"]))
reloaded = load_dataset(annotated, "generic-folder").get("eye_0000").load_labels()
assert (reloaded == labels).all()
print(f"round-trip through the dataset loader ok -> {annotated}")

# Undo pops the last commit; the session is back to pupil-only.
client.post(f"/sessions/{sid}/undo")
export = client.get(f"/sessions/{sid}/export").json()
labels = np.asarray(Image.open(io.BytesIO(base64.b64decode(export["label_image_b64"]))))
print("after undo, classes:", sorted(np.unique(labels).tolist()))
