import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra.numpy import arrays
from PIL import Image as PILImage

from freqpoison.errors import EmptyDataset, MixedDimensions, UnreadableFile, UnsupportedBitDepth, UnsupportedFormat
from freqpoison.image_io import (
    MANIFEST_KEYS, PoisonRecord, load_dataset, load_image, read_manifest, save_image, write_manifest,
)


def record(**kw):
    base = dict(source_id="cat/a.png", target_class=2, block_index=1, channel=0, orientation="vertical",
                coefficient=0.875, psnr_db=41.2, tuner_iterations=7)
    base.update(kw)
    return PoisonRecord(**base)


def test_zero_ppm(tmp_path):
    p = tmp_path / "z.ppm"
    p.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
    img = load_image(p)
    assert img.shape == (2, 2, 3) and img.dtype == np.uint8 and not img.any()


def test_ppm_with_comment(tmp_path):
    p = tmp_path / "c.ppm"
    p.write_bytes(b"P6\n# made by hand\n1 1\n255\n" + bytes([1, 2, 3]))
    assert load_image(p).tolist() == [[[1, 2, 3]]]


def test_truncated_files(tmp_path):
    p = tmp_path / "t.ppm"
    p.write_bytes(b"P6\n4 4\n255\n" + bytes(10))
    with pytest.raises(UnreadableFile):
        load_image(p)
    img = np.zeros((8, 8, 3), dtype=np.uint8)
    save_image(img, tmp_path / "x.png")
    raw = (tmp_path / "x.png").read_bytes()
    (tmp_path / "y.png").write_bytes(raw[: len(raw) // 2])
    with pytest.raises(UnreadableFile):
        load_image(tmp_path / "y.png")


def test_rejections(tmp_path):
    (tmp_path / "a.jpg").write_bytes(b"\xff\xd8\xff\xe0garbage")
    with pytest.raises(UnsupportedFormat):
        load_image(tmp_path / "a.jpg")
    (tmp_path / "deep.ppm").write_bytes(b"P6\n1 1\n65535\n" + bytes(6))
    with pytest.raises(UnsupportedBitDepth):
        load_image(tmp_path / "deep.ppm")
    PILImage.fromarray(np.zeros((4, 4), dtype=np.uint16)).save(tmp_path / "deep.png")
    with pytest.raises(UnsupportedBitDepth):
        load_image(tmp_path / "deep.png")
    with pytest.raises(UnreadableFile):
        load_image(tmp_path / "missing.png")


def test_grayscale_png(tmp_path):
    PILImage.fromarray(np.arange(16, dtype=np.uint8).reshape(4, 4)).save(tmp_path / "g.png")
    img = load_image(tmp_path / "g.png")
    assert img.shape == (4, 4, 1)
    save_image(img, tmp_path / "g2.png")
    assert np.array_equal(load_image(tmp_path / "g2.png"), img)


@given(arrays(np.uint8, (5, 7, 3)))
@settings(max_examples=25, deadline=None)
def test_round_trip_both_formats(tmp_path_factory, img):
    d = tmp_path_factory.mktemp("rt")
    for name in ("a.png", "a.ppm"):
        save_image(img, d / name)
        assert np.array_equal(load_image(d / name), img)


def _tree(root, spec):
    for cls, shapes in spec.items():
        (root / cls).mkdir(parents=True)
        for i, shape in enumerate(shapes):
            save_image(np.full(shape, i, dtype=np.uint8), root / cls / f"{i}.png")


def test_load_dataset(tmp_path):
    _tree(tmp_path, {"dog": [(4, 4, 3)] * 2, "cat": [(4, 4, 3)] * 2})
    ds = load_dataset(tmp_path)
    assert ds.class_names == ["cat", "dog"]
    assert [s.source_id for s in ds.samples] == ["cat/0.png", "cat/1.png", "dog/0.png", "dog/1.png"]
    assert [s.label for s in ds.samples] == [0, 0, 1, 1]
    again = load_dataset(tmp_path)
    assert [s.source_id for s in again.samples] == [s.source_id for s in ds.samples]


def test_dataset_errors(tmp_path):
    with pytest.raises(EmptyDataset):
        load_dataset(tmp_path)
    _tree(tmp_path / "mixed", {"a": [(31, 32, 3), (32, 32, 3)]})
    with pytest.raises(MixedDimensions):
        load_dataset(tmp_path / "mixed")


def test_manifest_schema_and_round_trip(tmp_path):
    write_manifest([], tmp_path / "e.json")
    assert (tmp_path / "e.json").read_text().strip() == "[]"
    recs = [record(), record(source_id="dog/b.png", psnr_db=math.inf, coefficient=0.1)]
    write_manifest(recs, tmp_path / "m.json")
    data = json.loads((tmp_path / "m.json").read_text(encoding="utf-8"))
    assert len(data[0]) == 8 and tuple(data[0]) == MANIFEST_KEYS
    assert data[1]["psnr_db"] is None
    assert read_manifest(tmp_path / "m.json") == recs
