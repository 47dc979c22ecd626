"""HTTP-backed provider adapters.

Each capability POSTs a JSON payload to ``{base_url}/v1/<capability>`` and
expects a JSON body back. Binary results travel base64-encoded and are
written into the artifact store, so the rest of the pipeline only ever sees
content-addressed references. Transport errors and 5xx responses are retried
with backoff and surface as transient failures (the workflow executor retries
those); 4xx responses are permanent adapter failures.
"""

from __future__ import annotations

import base64
import time
from typing import Any, Sequence

import httpx

from storyreel.artifacts import ArtifactStore
from storyreel.domain.model import ArtifactRef, BoundingBox, MediaType, StyleSpec
from storyreel.errors import AdapterFailureError, TransientAdapterError
from storyreel.utilities.adapters import AdapterSuite

DEFAULT_MAX_ATTEMPTS = 3
DEFAULT_BACKOFF_S = 0.2


class HttpProviderClient:
    def __init__(
        self,
        base_url: str,
        *,
        client: httpx.Client | None = None,
        max_attempts: int = DEFAULT_MAX_ATTEMPTS,
        backoff_s: float = DEFAULT_BACKOFF_S,
    ) -> None:
        if not base_url:
            raise AdapterFailureError("http provider needs a base url")
        self._client = client or httpx.Client(base_url=base_url, timeout=30.0)
        self._max_attempts = max_attempts
        self._backoff_s = backoff_s

    def post(self, capability: str, payload: dict[str, Any]) -> dict[str, Any]:
        last_error: str = ""
        for attempt in range(1, self._max_attempts + 1):
            try:
                response = self._client.post(f"/v1/{capability}", json=payload)
            except httpx.HTTPError as exc:
                last_error = str(exc)
            else:
                if response.status_code < 400:
                    return response.json()
                if response.status_code < 500:
                    raise AdapterFailureError(
                        f"{capability} rejected the request: {response.status_code}",
                        capability=capability,
                        status_code=response.status_code,
                    )
                last_error = f"status {response.status_code}"
            if attempt < self._max_attempts:
                time.sleep(self._backoff_s * attempt)
        raise TransientAdapterError(
            f"{capability} unavailable after {self._max_attempts} attempts: {last_error}",
            capability=capability,
        )


def _box_doc(box: BoundingBox) -> dict[str, float]:
    return {"x": box.x, "y": box.y, "w": box.w, "h": box.h}


class _HttpBase:
    def __init__(self, client: HttpProviderClient, store: ArtifactStore) -> None:
        self._client = client
        self._store = store

    def _put_b64(self, encoded: str, media_type: MediaType) -> ArtifactRef:
        return self._store.put(base64.b64decode(encoded), media_type)


class HttpTextGeneration:
    def __init__(self, client: HttpProviderClient) -> None:
        self._client = client

    def generate(self, prompt: str, *, seed: int) -> str:
        return self._client.post("text", {"prompt": prompt, "seed": seed})["text"]


class HttpTextToImage(_HttpBase):
    def generate(self, description, magic_words, layout, seed) -> ArtifactRef:
        body = self._client.post(
            "text-to-image",
            {
                "description": description,
                "magic_words": list(magic_words),
                "layout": [{"label": label, "box": _box_doc(box)} for label, box in layout],
                "seed": seed,
            },
        )
        return self._put_b64(body["image_base64"], MediaType.IMAGE_RASTER)


class HttpSegmentation(_HttpBase):
    def segment(self, image: ArtifactRef, character_labels: Sequence[str]) -> ArtifactRef:
        body = self._client.post(
            "segment",
            {"image_hash": image.content_hash, "labels": list(character_labels)},
        )
        return self._put_b64(body["masks_base64"], MediaType.MASK_SET)


class HttpInpainting(_HttpBase):
    def inpaint(self, image, masks, descriptions) -> ArtifactRef:
        body = self._client.post(
            "inpaint",
            {
                "image_hash": image.content_hash,
                "masks_hash": masks.content_hash,
                "descriptions": list(descriptions),
            },
        )
        return self._put_b64(body["image_base64"], MediaType.IMAGE_RASTER)


class HttpDepth(_HttpBase):
    def estimate(self, image: ArtifactRef) -> ArtifactRef:
        body = self._client.post("depth", {"image_hash": image.content_hash})
        return self._put_b64(body["depth_base64"], MediaType.DEPTH_MAP)


class HttpStyleTransfer(_HttpBase):
    def transfer(self, style: StyleSpec, description, image, depth, edit_strength) -> ArtifactRef:
        body = self._client.post(
            "style-transfer",
            {
                "style_id": style.id,
                "adapter_params": dict(style.adapter_params),
                "description": description,
                "image_hash": image.content_hash,
                "depth_hash": depth.content_hash,
                "edit_strength": edit_strength,
            },
        )
        return self._put_b64(body["image_base64"], MediaType.IMAGE_RASTER)


class HttpSpeech(_HttpBase):
    def synthesize(self, text: str, voice_id: str) -> tuple[ArtifactRef, int]:
        body = self._client.post("speech", {"text": text, "voice_id": voice_id})
        ref = self._put_b64(body["audio_base64"], MediaType.AUDIO_WAVE)
        return ref, int(body["duration_ms"])


class HttpMusic(_HttpBase):
    def select(self, mood_tag: str, duration_ms: int) -> tuple[ArtifactRef, int]:
        body = self._client.post("music", {"mood_tag": mood_tag, "duration_ms": duration_ms})
        ref = self._put_b64(body["audio_base64"], MediaType.AUDIO_WAVE)
        return ref, int(body["duration_ms"])


class HttpCritique(_HttpBase):
    def critique(self, image: ArtifactRef, description: str) -> list[str]:
        body = self._client.post(
            "critique", {"image_hash": image.content_hash, "description": description}
        )
        return [str(s) for s in body["suggestions"]]


class HttpAnimate(_HttpBase):
    def animate(self, image: ArtifactRef, duration_ms: int) -> ArtifactRef:
        body = self._client.post(
            "animate", {"image_hash": image.content_hash, "duration_ms": duration_ms}
        )
        return self._put_b64(body["video_base64"], MediaType.IMAGE_RASTER)


def build_http_suite(
    base_url: str,
    store: ArtifactStore,
    *,
    client: httpx.Client | None = None,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    backoff_s: float = DEFAULT_BACKOFF_S,
) -> AdapterSuite:
    provider = HttpProviderClient(
        base_url, client=client, max_attempts=max_attempts, backoff_s=backoff_s
    )
    return AdapterSuite(
        text=HttpTextGeneration(provider),
        text_to_image=HttpTextToImage(provider, store),
        segmentation=HttpSegmentation(provider, store),
        inpainting=HttpInpainting(provider, store),
        depth=HttpDepth(provider, store),
        style_transfer=HttpStyleTransfer(provider, store),
        speech=HttpSpeech(provider, store),
        music=HttpMusic(provider, store),
        critique=HttpCritique(provider, store),
        animate=HttpAnimate(provider, store),
    )
