import json
import math

import pytest

import puppetai


def test_sequence_round_trip():
    items = puppetai.parse_sequence("[Waving][1][Joy][1]")
    assert items == [("Waving", 1.0), ("Joy", 1.0)]
    assert puppetai.format_sequence(items) == "[Waving][1][Joy][1]"


def test_parse_error_carries_code_and_offset():
    with pytest.raises(puppetai.PuppetError) as info:
        puppetai.parse_sequence("[Waving][1")
    code, _message, offset = info.value.args
    assert code == "UnbalancedBracket"
    assert offset is not None
    assert isinstance(info.value, ValueError)


def test_forward_kinematics_straight_arm():
    frames = puppetai.forward_kinematics({})
    assert set(frames) == {"body", "left_arm", "right_arm"}
    assert len(frames["left_arm"]) == 7
    body_tip = frames["body"][-1]
    assert body_tip[0] == pytest.approx(0.0, abs=1e-9)


def test_cable_displacement():
    assert puppetai.cable_displacement("left_arm", "vertical", 150.0) == pytest.approx(8.0 * math.radians(150.0))


def test_codec_reference_frame():
    frame = puppetai.encode_set_target(1, 10.0)
    assert frame == bytes([0xAA, 0x55, 0x01, 0x01, 0x10, 0x27, 0x00, 0x00, 0x79])
    assert puppetai.decode_frame(frame)["target_um"] == 10000
    with pytest.raises(puppetai.PuppetError):
        puppetai.decode_frame(frame[:-1] + b"\x00")


def test_perception():
    assert puppetai.transcribe("I'm so tired")["emotion"] == "sadness"
    assert puppetai.respond("hi, how are you") == "[Waving][1][Joy][1]"


@pytest.mark.parametrize(
    "name,expected",
    [
        ("greeting", "[Waving][1][Joy][1]"),
        ("positive", "[Joy][1][Dancing][3]"),
        ("negative", "[Sadness][1][Hug][3]"),
        ("confusion", "[Confusion][1]"),
    ],
)
def test_scenarios(name, expected):
    result = puppetai.run_script(str(puppetai.script(name)), str(puppetai.demo_config()))
    assert result["report"]["sequences_executed"] == [expected]
    assert len(result["log"]) == result["report"]["ticks"]
    first = json.loads(result["log"][0])
    assert list(first) == ["tick", "t_s", "phase", "position_mm", "bend_deg", "faults"]


def test_play_tick_count():
    result = puppetai.play("[Confusion][1]", str(puppetai.demo_config()))
    assert len(result["log"]) == 150
