import json
import threading
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import pytest

from travscore.server import AnnotationService, build_server
from travscore.synthworld import generate_domain_specs, write_dataset


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("served")
    specs = generate_domain_specs(3, domain="asphalt_like", seed=0, height=32, width=54)
    write_dataset(specs, root, k=9)
    return root


@pytest.fixture()
def annotations_dir(tmp_path):
    out = tmp_path / "ann"
    out.mkdir()
    return out


@pytest.fixture()
def server(dataset_dir, annotations_dir):
    httpd = build_server(
        manifest_path=dataset_dir / "manifest.jsonl",
        annotations_dir=annotations_dir,
        port=0,
    )
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield httpd
    httpd.shutdown()
    httpd.server_close()
    thread.join(timeout=5)


def url(server, path):
    host, port = server.server_address[:2]
    return f"http://{host}:{port}{path}"


def get(server, path):
    try:
        with urllib.request.urlopen(url(server, path)) as resp:
            return resp.status, resp.read(), resp.headers.get("Content-Type", "")
    except urllib.error.HTTPError as err:
        return err.code, err.read(), err.headers.get("Content-Type", "")


def put(server, path, payload):
    body = json.dumps(payload).encode()
    req = urllib.request.Request(url(server, path), data=body, method="PUT")
    req.add_header("Content-Type", "application/json")
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as err:
        return err.code, err.read()


VALID = {"k": 9, "cutoff_y": [0.25] * 9, "annotator_id": "tester"}


class TestAnnotationService:
    def test_frames_reflect_manifest_order(self, dataset_dir, annotations_dir):
        service = AnnotationService(dataset_dir / "manifest.jsonl", annotations_dir)
        frames = service.frames()
        assert [f["index"] for f in frames] == [0, 1, 2]
        assert all(not f["annotated"] for f in frames)
        assert all(f["image_path"].startswith("images/") for f in frames)

    def test_put_then_flagged_annotated(self, dataset_dir, annotations_dir):
        service = AnnotationService(dataset_dir / "manifest.jsonl", annotations_dir)
        service.put_annotation(1, dict(VALID))
        flags = [f["annotated"] for f in service.frames()]
        assert flags == [False, True, False]

    def test_rejects_out_of_range_cutoff(self, dataset_dir, annotations_dir):
        service = AnnotationService(dataset_dir / "manifest.jsonl", annotations_dir)
        bad = {"k": 9, "cutoff_y": [0.2] * 8 + [1.2]}
        with pytest.raises(ValueError):
            service.put_annotation(0, bad)
        assert list(annotations_dir.iterdir()) == []

    def test_rejects_wrong_k_and_bad_index(self, dataset_dir, annotations_dir):
        service = AnnotationService(dataset_dir / "manifest.jsonl", annotations_dir)
        with pytest.raises(ValueError):
            service.put_annotation(0, {"k": 4, "cutoff_y": [0.1] * 4})
        with pytest.raises(IndexError):
            service.put_annotation(99, dict(VALID))
        assert list(annotations_dir.iterdir()) == []


class TestHttpApi:
    def test_frame_list(self, server):
        status, body, ctype = get(server, "/api/frames")
        assert status == 200
        assert "application/json" in ctype
        doc = json.loads(body)
        assert doc["k"] == 9
        assert len(doc["frames"]) == 3

    def test_image_bytes_match_file(self, server, dataset_dir):
        status, body, ctype = get(server, "/api/image/0")
        assert status == 200
        assert ctype == "image/png"
        doc = json.loads(get(server, "/api/frames")[1])
        on_disk = (dataset_dir / doc["frames"][0]["image_path"]).read_bytes()
        assert body == on_disk

    def test_save_then_fetch_round_trip(self, server, annotations_dir):
        status, _ = put(server, "/api/annotation/0", VALID)
        assert status == 200
        status, body, _ = get(server, "/api/annotation/0")
        assert status == 200
        saved = next(annotations_dir.glob("*.json")).read_bytes()
        assert body == saved
        doc = json.loads(body)
        assert doc["cutoff_y"] == [0.25] * 9
        assert doc["annotator_id"] == "tester"

    def test_invalid_payload_rejected_nothing_written(self, server, annotations_dir):
        bad = {"k": 9, "cutoff_y": [0.2] * 8 + [1.2]}
        status, body = put(server, "/api/annotation/0", bad)
        assert status == 400
        assert b"cutoff" in body.lower()
        assert list(annotations_dir.iterdir()) == []

    def test_malformed_json_rejected(self, server, annotations_dir):
        req = urllib.request.Request(
            url(server, "/api/annotation/0"), data=b"{not json", method="PUT"
        )
        try:
            with urllib.request.urlopen(req) as resp:
                status = resp.status
        except urllib.error.HTTPError as err:
            status = err.code
        assert status == 400
        assert list(annotations_dir.iterdir()) == []

    def test_unknown_frame_404(self, server):
        status, _ = put(server, "/api/annotation/42", VALID)
        assert status == 404
        status, _, _ = get(server, "/api/image/42")
        assert status == 404

    def test_unknown_path_404(self, server):
        status, _, _ = get(server, "/api/nonsense")
        assert status == 404

    def test_missing_annotation_404(self, server):
        status, _, _ = get(server, "/api/annotation/2")
        assert status == 404

    def test_concurrent_saves_to_different_frames(self, server, annotations_dir):
        def save(i):
            payload = {"k": 9, "cutoff_y": [i / 10.0] * 9}
            return put(server, f"/api/annotation/{i}", payload)[0]

        with ThreadPoolExecutor(max_workers=2) as pool:
            codes = list(pool.map(save, [1, 2]))
        assert codes == [200, 200]
        docs = sorted(annotations_dir.glob("*.json"))
        assert len(docs) == 2
        values = sorted(json.loads(d.read_text())["cutoff_y"][0] for d in docs)
        assert values == [0.1, 0.2]

    def test_root_serves_html(self, server):
        status, body, ctype = get(server, "/")
        assert status == 200
        assert "text/html" in ctype
        assert b"<html" in body.lower()

    def test_static_ui_dir_served(self, dataset_dir, annotations_dir, tmp_path):
        ui = tmp_path / "ui"
        ui.mkdir()
        (ui / "index.html").write_text("<html><body>annotator</body></html>")
        (ui / "app.js").write_text("console.log('hi')")
        httpd = build_server(
            manifest_path=dataset_dir / "manifest.jsonl",
            annotations_dir=annotations_dir,
            port=0,
            ui_dir=ui,
        )
        thread = threading.Thread(target=httpd.serve_forever, daemon=True)
        thread.start()
        try:
            status, body, _ = get(httpd, "/")
            assert status == 200 and b"annotator" in body
            status, body, ctype = get(httpd, "/app.js")
            assert status == 200 and b"hi" in body
            assert "javascript" in ctype
            # path traversal is refused
            secret = tmp_path / "secret.txt"
            secret.write_text("nope")
            status, body, _ = get(httpd, "/../secret.txt")
            assert status == 404 or b"nope" not in body
        finally:
            httpd.shutdown()
            httpd.server_close()
            thread.join(timeout=5)
