"""Outline text, the captioning prompt, rule-based captions, LLM client.

The prompt template is a versioned text asset reproduced verbatim; its
character-motion slot reuses the camera placeholder name (a quirk kept
as-is) and is filled with the character outline. Rule-based captions come
from a closed template grammar so downstream text encoders can train a
small embedding from scratch.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from importlib import resources

import requests

from .errors import MalformedSegmentsError, ShapeError, TransportError
from .tagging import TagSegment, all_states, label_for_state

PLACEHOLDER_NUM = "{CURRENT_NUM_FRAME}"
PLACEHOLDER_DESC = "{CURRENT_CAMERA_DESCRIPTION}"


def prompt_template() -> str:
    return resources.files("cinetraj").joinpath("assets/prompt_template.txt").read_text("utf-8")


@dataclass(frozen=True)
class Outline:
    """Frame-indexed motion outline feeding the captioning prompt."""

    total_frames: int
    camera_lines: tuple[str, ...]
    character_lines: tuple[str, ...]


@dataclass(frozen=True)
class Caption:
    text: str
    kind: str  # "camera" | "camera-character"

    def __post_init__(self):
        if not self.text:
            raise ShapeError("caption text must be non-empty")
        if self.kind not in ("camera", "camera-character"):
            raise ShapeError(f"unknown caption kind {self.kind!r}")


def _check_coverage(segs: list[TagSegment], n: int, what: str):
    if not segs:
        raise MalformedSegmentsError(f"{what}: empty segment list")
    if segs[0].start != 0 or segs[-1].end != n - 1:
        raise MalformedSegmentsError(f"{what}: segments must cover [0, {n - 1}]")
    for prev, cur in zip(segs, segs[1:]):
        if cur.start != prev.end + 1:
            raise MalformedSegmentsError(
                f"{what}: gap or overlap between frame {prev.end} and {cur.start}"
            )


def _segment_line(seg: TagSegment) -> str:
    return f"Between frames {seg.start} and {seg.end}: {seg.label}"


def build_outline(
    cam_segs: list[TagSegment],
    char_segs: list[TagSegment] | None,
    n: int,
) -> Outline:
    """Format segments as outline lines; empty character lists become static."""
    _check_coverage(cam_segs, n, "camera")
    if not char_segs:
        char_segs = [TagSegment(0, n - 1, "static")]
    _check_coverage(char_segs, n, "character")
    return Outline(
        total_frames=n,
        camera_lines=tuple(_segment_line(s) for s in cam_segs),
        character_lines=tuple(_segment_line(s) for s in char_segs),
    )


def build_llm_prompt(outline: Outline) -> str:
    """Instantiate the prompt template byte-exactly.

    The header number follows the template's own example, which prints the
    last frame index (total frames 210 shows as 209). Both description
    slots share the camera placeholder name; the second is filled with the
    character outline.
    """
    out = prompt_template()
    out = out.replace(PLACEHOLDER_NUM, str(outline.total_frames - 1), 1)
    out = out.replace(PLACEHOLDER_DESC, ", ".join(outline.camera_lines), 1)
    out = out.replace(PLACEHOLDER_DESC, ", ".join(outline.character_lines), 1)
    return out


_OUTLINE_RE = re.compile(r"Between frames (\d+) and (\d+): (.*?)(?=, Between frames |$)")


def parse_outline_line(text: str) -> list[TagSegment]:
    """Invert the comma-joined outline formatting back to segments."""
    segs = [TagSegment(int(a), int(b), label) for a, b, label in _OUTLINE_RE.findall(text)]
    if not segs:
        raise MalformedSegmentsError(f"no outline entries in {text!r}")
    return segs


# -- rule-based captions -------------------------------------------------------

_CAMERA_VERBS = {
    "truck left": "trucks left",
    "truck right": "trucks right",
    "boom bottom": "booms bottom",
    "boom top": "booms top",
    "push-in": "pushes-in",
    "pull-out": "pulls-out",
}
_CHARACTER_VERBS = {
    "move left": "moves left",
    "move right": "moves right",
    "move down": "moves down",
    "move up": "moves up",
    "move forward": "moves forward",
    "move backward": "moves backward",
}


def _phrase(label: str, vocab: str) -> str:
    """Verb phrase for one (possibly composite) segment label."""
    if label == "static":
        return "remains static" if vocab == "camera" else "stays static"
    table = _CAMERA_VERBS if vocab == "camera" else _CHARACTER_VERBS
    parts = []
    rest = label
    while rest:
        for atom, verb in table.items():
            if rest == atom:
                parts.append(verb)
                rest = ""
                break
            if rest.startswith(atom + "-"):
                parts.append(verb)
                rest = rest[len(atom) + 1:]
                break
        else:
            raise ShapeError(f"unknown {vocab} label {label!r}")
    return " and ".join(parts)


def camera_phrase_table() -> dict[str, str]:
    """All 27 camera labels mapped to their caption verb phrases."""
    return {
        label_for_state(s, "camera"): _phrase(label_for_state(s, "camera"), "camera")
        for s in all_states()
    }


def character_phrase_table() -> dict[str, str]:
    return {
        label_for_state(s, "character"): _phrase(label_for_state(s, "character"), "character")
        for s in all_states()
    }


def _merged_phases(
    cam_segs: list[TagSegment], char_segs: list[TagSegment]
) -> list[tuple[str, str]]:
    """Timeline of (camera label, character label) pairs, deduplicated."""
    bounds = sorted({s.start for s in cam_segs} | {s.start for s in char_segs})

    def label_at(segs, frame):
        for s in segs:
            if s.start <= frame <= s.end:
                return s.label
        raise MalformedSegmentsError(f"frame {frame} not covered")

    phases = []
    for b in bounds:
        pair = (label_at(cam_segs, b), label_at(char_segs, b))
        if not phases or phases[-1] != pair:
            phases.append(pair)
    return phases


def rule_based_caption(
    cam_segs: list[TagSegment], char_segs: list[TagSegment] | None = None
) -> Caption:
    """Deterministic caption from the closed template grammar.

    Camera-only captions chain camera phrases with "then"; joint captions
    pair each phase's character and camera clauses. No digits ever appear.
    """
    if not cam_segs:
        raise MalformedSegmentsError("camera segments required")
    if char_segs:
        clauses = []
        for cam_label, char_label in _merged_phases(cam_segs, char_segs):
            if cam_label == "static" and char_label == "static":
                clauses.append("the camera remains static")
            else:
                clauses.append(
                    f"while the character {_phrase(char_label, 'character')}, "
                    f"the camera {_phrase(cam_label, 'camera')}"
                )
        text = ", then ".join(clauses)
        kind = "camera-character"
    else:
        phrases = [_phrase(s.label, "camera") for s in cam_segs]
        dedup = [p for i, p in enumerate(phrases) if i == 0 or p != phrases[i - 1]]
        text = "the camera " + ", then ".join(dedup)
        kind = "camera"
    text = text[0].upper() + text[1:] + "."
    if any(ch.isdigit() for ch in text):
        raise ShapeError("rule-based caption must not contain digits")
    return Caption(text, kind)


def parse_rule_caption(text: str) -> tuple[set[str], set[str]]:
    """Recover (camera labels, character labels) from a rule-based caption.

    Longest-first phrase matching over the closed grammar; spans already
    claimed by a longer composite phrase are skipped.
    """
    low = text.lower()
    found_cam, found_char = set(), set()
    claimed: list[tuple[int, int]] = []

    def scan(table: dict[str, str], sink: set):
        # camera and character verb tables share no phrases, so phrases can
        # be matched without their "the camera"/"the character" anchor
        for label, phrase in sorted(table.items(), key=lambda kv: -len(kv[1])):
            start = 0
            while True:
                i = low.find(phrase, start)
                if i < 0:
                    break
                span = (i, i + len(phrase))
                if not any(a < span[1] and span[0] < b for a, b in claimed):
                    claimed.append(span)
                    sink.add(label)
                start = i + 1

    scan(camera_phrase_table(), found_cam)
    scan(character_phrase_table(), found_char)
    return found_cam, found_char


# -- closed vocabulary for trainable text encoders ------------------------------

PAD_TOKEN = "<pad>"


def _grammar_words() -> list[str]:
    words = {"the", "camera", "character", "while", "then"}
    for table in (camera_phrase_table(), character_phrase_table()):
        for phrase in table.values():
            words.update(phrase.split(" "))
    return sorted(words)


_VOCAB: tuple[str, ...] = (PAD_TOKEN, *_grammar_words())
_TOKEN_IDS = {w: i for i, w in enumerate(_VOCAB)}


def caption_vocabulary() -> tuple[str, ...]:
    """Closed token list; index 0 is padding."""
    return _VOCAB


def vocab_hash() -> str:
    return hashlib.sha256("\n".join(_VOCAB).encode("utf-8")).hexdigest()


def tokenize(text: str) -> list[int]:
    """Lowercase, strip sentence punctuation, map words to ids."""
    cleaned = text.lower().replace(",", " ").replace(".", " ")
    ids = []
    for word in cleaned.split():
        if word not in _TOKEN_IDS:
            raise ShapeError(f"word {word!r} outside the closed caption vocabulary")
        ids.append(_TOKEN_IDS[word])
    if not ids:
        raise ShapeError("empty caption after tokenization")
    return ids


# -- optional external captioner -------------------------------------------------


def llm_caption(endpoint: str, key: str | None, prompt: str,
                timeout: float = 30.0, max_tokens: int = 128,
                temperature: float = 0.0) -> Caption:
    """POST the prompt to a chat-completion style endpoint.

    Request: JSON {"prompt", "max_tokens", "temperature"}; response: 200
    with JSON {"completion": string}. Any transport or schema failure
    raises TransportError.
    """
    headers = {"Content-Type": "application/json"}
    if key:
        headers["Authorization"] = f"Bearer {key}"
    payload = {"prompt": prompt, "max_tokens": max_tokens, "temperature": temperature}
    try:
        resp = requests.post(endpoint, json=payload, headers=headers, timeout=timeout)
    except requests.RequestException as err:
        raise TransportError(f"captioner request failed: {err}") from err
    if resp.status_code != 200:
        raise TransportError(f"captioner returned status {resp.status_code}")
    try:
        completion = resp.json()["completion"]
    except (ValueError, KeyError) as err:
        raise TransportError(f"captioner response malformed: {err}") from err
    if not isinstance(completion, str) or not completion.strip():
        raise TransportError("captioner returned an empty completion")
    return Caption(completion.strip(), "camera-character")
