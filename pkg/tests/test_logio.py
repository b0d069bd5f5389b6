import pytest

from lumipad.conditions import ConditionSpec
from lumipad.logio import (
    LogFormatError,
    dump_trial_log,
    iter_log_files,
    parse_trial_log,
    read_trial_log,
    write_trial_log,
)
from lumipad.policies import TactilePolicy
from lumipad.world import ScenarioSpec, run_trial


@pytest.fixture(scope="module")
def sample_log():
    spec = ScenarioSpec(drone_count=2, speed_class="fast")
    return run_trial(
        spec, [TactilePolicy(), TactilePolicy()], 77, ConditionSpec("T", "fast", 2)
    )


def test_round_trip_preserves_everything(sample_log, tmp_path):
    path = tmp_path / "trial.jsonl"
    write_trial_log(sample_log, path)
    back = read_trial_log(path)
    assert back.condition == sample_log.condition
    assert back.seed == sample_log.seed
    assert back.dt == sample_log.dt
    assert back.scenario == sample_log.scenario
    assert back.timed_out == sample_log.timed_out
    assert len(back.samples) == len(sample_log.samples)
    assert back.outcomes == sample_log.outcomes
    mid_a = sample_log.samples[len(sample_log.samples) // 2]
    mid_b = back.samples[len(back.samples) // 2]
    assert mid_b.t == mid_a.t
    assert mid_b.drones == mid_a.drones
    assert mid_b.pads == mid_a.pads


def test_dump_is_deterministic(sample_log):
    assert dump_trial_log(sample_log) == dump_trial_log(sample_log)


def test_dump_second_serialization_of_reparsed_log_matches(sample_log):
    text = dump_trial_log(sample_log)
    assert dump_trial_log(parse_trial_log(text)) == text


def test_stream_structure(sample_log):
    lines = dump_trial_log(sample_log).strip().split("\n")
    assert lines[0].startswith('{"record":"header"')
    assert lines[-1].startswith('{"record":"outcome"')
    assert all(l.startswith('{"record":"sample"') for l in lines[1:-1])


def test_missing_header_rejected(sample_log):
    text = dump_trial_log(sample_log)
    body = "\n".join(text.splitlines()[1:])
    with pytest.raises(LogFormatError):
        parse_trial_log(body)


def test_missing_outcome_rejected(sample_log):
    text = dump_trial_log(sample_log)
    body = "\n".join(text.splitlines()[:-1])
    with pytest.raises(LogFormatError):
        parse_trial_log(body)


def test_bad_json_line_reports_position(sample_log):
    text = dump_trial_log(sample_log) + "{broken\n"
    with pytest.raises(LogFormatError) as err:
        parse_trial_log(text, source="x.jsonl")
    assert "x.jsonl" in str(err.value)


def test_unknown_record_kind_rejected(sample_log):
    text = dump_trial_log(sample_log) + '{"record":"mystery"}\n'
    with pytest.raises(LogFormatError):
        parse_trial_log(text)


def test_unsupported_schema_rejected(sample_log):
    text = dump_trial_log(sample_log).replace('"schema":1', '"schema":999', 1)
    with pytest.raises(LogFormatError):
        parse_trial_log(text)


def test_iter_log_files_sorted(tmp_path):
    for name in ("b.jsonl", "a.jsonl", "c.txt"):
        (tmp_path / name).write_text("{}", encoding="utf-8")
    names = [p.name for p in iter_log_files(tmp_path)]
    assert names == ["a.jsonl", "b.jsonl"]


def test_head_samples_survive_round_trip():
    from lumipad.harness import default_config, run_single_trial

    cfg = default_config()
    cond = ConditionSpec("VT", "fast", 2)
    log = run_single_trial(cfg, cond, 0)
    assert log.samples[0].head is not None
    back = parse_trial_log(dump_trial_log(log))
    assert back.samples[0].head == log.samples[0].head
    assert back.samples[-1].head == log.samples[-1].head
