"""Frame energies, silence detection, rounding and the plosive exclusion."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import RATE, TONE_HZ, build_signal
from pausecue.pauses import (PauseConfig, UnsupportedFormat, detect_pauses,
                             frame_energy, read_pauses, read_wav, round_tenth,
                             write_pauses, write_wav)


# ---------------------------------------------------------------------------
# rounding
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("raw,expected", [
    (0.42, 0.4), (0.18, 0.2), (0.90, 0.9), (2.0, 2.0),
    (0.04, 0.0), (0.06, 0.1),
    (0.15, 0.2), (0.25, 0.3), (0.35, 0.4), (0.45, 0.5),  # ties round up
    (0.4499, 0.4),
])
def test_round_tenth(raw, expected):
    assert round_tenth(raw) == pytest.approx(expected)


# ---------------------------------------------------------------------------
# frame_energy
# ---------------------------------------------------------------------------

def test_silence_gives_zero_energies():
    frames = frame_energy(np.zeros(RATE), RATE)
    assert len(frames.energies) == 100
    assert not frames.energies.any()


def test_full_scale_sine_is_stationary():
    t = np.arange(RATE) / RATE
    frames = frame_energy(np.sin(2 * math.pi * TONE_HZ * t), RATE)
    assert len(frames.energies) == 100
    assert frames.energies.max() / frames.energies.min() < 1.01


def test_energies_match_bruteforce_rms():
    samples = build_signal([("tone", 0.35), ("silence", 0.2), ("noise", 0.25, 0.02)])
    frames = frame_energy(samples, RATE)
    step = 160
    for i in range(len(frames.energies)):
        chunk = samples[i * step:(i + 1) * step]
        expected = math.sqrt(float(np.mean(chunk * chunk)))
        if expected == 0.0:
            assert frames.energies[i] == 0.0
        else:
            assert abs(frames.energies[i] - expected) <= 1e-6 * expected


def test_partial_final_frame():
    samples = np.ones(RATE + 80) * 0.5
    frames = frame_energy(samples, RATE)
    assert len(frames.energies) == 101
    assert frames.energies[-1] == pytest.approx(0.5)
    assert frames.n_samples == RATE + 80


def test_frame_energy_rejects_bad_input():
    with pytest.raises(UnsupportedFormat):
        frame_energy(np.zeros((100, 2)), RATE)
    with pytest.raises(UnsupportedFormat):
        frame_energy(np.zeros(100), 4000)


# ---------------------------------------------------------------------------
# wav io
# ---------------------------------------------------------------------------

def test_read_wav_roundtrip(tmp_path):
    path = tmp_path / "tone.wav"
    signal = build_signal([("tone", 0.5)])
    write_wav(path, signal, RATE)
    samples, rate = read_wav(path)
    assert rate == RATE
    assert np.abs(samples - signal).max() < 1e-3  # 16-bit quantization


def test_read_wav_rejects_stereo(tmp_path):
    import wave
    path = tmp_path / "stereo.wav"
    with wave.open(str(path), "wb") as fp:
        fp.setnchannels(2)
        fp.setsampwidth(2)
        fp.setframerate(RATE)
        fp.writeframes(b"\x00\x00" * 200)
    with pytest.raises(UnsupportedFormat, match="mono"):
        read_wav(path)


def test_read_wav_rejects_garbage(tmp_path):
    path = tmp_path / "empty.wav"
    path.write_bytes(b"")
    with pytest.raises(UnsupportedFormat):
        read_wav(path)


# ---------------------------------------------------------------------------
# detect_pauses
# ---------------------------------------------------------------------------

def detect(segments, **kw):
    samples = build_signal(segments)
    frames = frame_energy(samples, RATE)
    return detect_pauses(frames, **kw)


def test_single_inserted_silence():
    records = detect([("tone", 0.5), ("silence", 0.42), ("tone", 0.5)])
    assert len(records) == 1
    rec = records[0]
    assert rec.reported_duration_s == pytest.approx(0.4)
    assert abs(rec.raw_duration_s - 0.42) <= 0.05
    assert abs(rec.start_s - 0.5) <= 0.02


def test_continuous_tone_has_no_pauses():
    assert detect([("tone", 1.5)]) == []


def test_pure_silence_has_no_pauses():
    assert detect([("silence", 1.0)]) == []


def test_short_silence_below_min_is_dropped():
    assert detect([("tone", 0.5), ("silence", 0.03), ("tone", 0.5)]) == []


def test_word_internal_silence_excluded():
    # 0.06 s closure inside one word span; the 0.42 s gap between words stays
    segments = [("tone", 0.3), ("silence", 0.06), ("tone", 0.3),
                ("silence", 0.42), ("tone", 0.5)]
    spans = [(0.0, 0.66), (1.08, 1.58)]
    records = detect(segments, word_spans=spans)
    assert len(records) == 1
    assert records[0].reported_duration_s == pytest.approx(0.4)


def test_short_silence_without_spans_is_suspect():
    segments = [("tone", 0.3), ("silence", 0.06), ("tone", 0.3),
                ("silence", 0.42), ("tone", 0.5)]
    records = detect(segments)
    assert len(records) == 2
    assert records[0].suspect and records[0].reported_duration_s == pytest.approx(0.1)
    assert not records[1].suspect


def test_detection_invariant_under_gain():
    segments = [("noise", 0.4, 0.001), ("tone", 0.4), ("silence", 0.3),
                ("noise", 0.3, 0.001), ("tone", 0.4)]
    base = detect(segments)
    for gain_db in (-12.0, 12.0):
        gain = 10 ** (gain_db / 20)
        samples = gain * build_signal(segments)
        scaled = detect_pauses(frame_energy(samples, RATE))
        assert [(r.start_s, r.reported_duration_s) for r in scaled] == \
               [(r.start_s, r.reported_duration_s) for r in base]


def test_records_ordered_and_disjoint():
    records = detect([("tone", 0.3), ("silence", 0.2), ("tone", 0.3),
                      ("silence", 0.5), ("tone", 0.3), ("silence", 0.15),
                      ("tone", 0.3)])
    assert len(records) == 3
    for a, b in zip(records, records[1:]):
        assert a.end_s <= b.start_s


@given(st.lists(st.floats(min_value=0.08, max_value=0.6), min_size=1, max_size=4))
@settings(max_examples=30, deadline=None)
def test_inserted_silences_recovered(durations):
    segments = [("tone", 0.3)]
    for duration in durations:
        duration = round(duration, 2)
        segments += [("silence", duration), ("tone", 0.3)]
    records = detect(segments)
    assert len(records) == len(durations)
    for record, duration in zip(records, durations):
        assert abs(record.raw_duration_s - round(duration, 2)) <= 0.05


def test_pause_jsonl_roundtrip(tmp_path):
    records = detect([("tone", 0.5), ("silence", 0.42), ("tone", 0.5)])
    path = tmp_path / "pauses.jsonl"
    write_pauses(path, records)
    again = read_pauses(path)
    assert [(r.start_s, r.raw_duration_s, r.reported_duration_s, r.position)
            for r in again] == \
           [(r.start_s, r.raw_duration_s, r.reported_duration_s, r.position)
            for r in records]
