import pytest

from src.database.db import ResultStore, run_key, sqlite_url
from src.validation import TrialOutcome


@pytest.fixture()
def store(tmp_path):
    store = ResultStore(sqlite_url(tmp_path))
    yield store
    store.close()


def outcome(n, trial, m=100, flagged=False):
    return TrialOutcome(n=n, trial=trial, m=m, flagged=flagged, d_true=0.25, seed=7, probes=12,
                        message="no passing budget" if flagged else None)


def test_run_key_is_order_independent():
    a = run_key({"metric": "mmd", "k": 2, "n_values": [10, 20]})
    b = run_key({"n_values": [10, 20], "k": 2, "metric": "mmd"})
    assert a == b
    assert len(a) == 16
    assert run_key({"metric": "mmd", "k": 3, "n_values": [10, 20]}) != a


def test_sqlite_url_creates_directory(tmp_path):
    url = sqlite_url(tmp_path / "nested" / "out")
    assert url.endswith("nested/out/trials.db")
    assert (tmp_path / "nested" / "out").is_dir()


def test_insert_and_query(store):
    assert store.insert_trial("run", "mmd", 2, outcome(10, 0))
    assert store.insert_trial("run", "mmd", 2, outcome(10, 1, flagged=True))
    assert store.insert_trial("run", "mmd", 2, outcome(5, 0))

    trials = store.query_trials("run")
    assert [(o.n, o.trial) for o in trials] == [(5, 0), (10, 0), (10, 1)]
    assert trials[2].flagged
    assert trials[2].message == "no passing budget"
    assert trials[0] == outcome(5, 0)
    assert len(store.query_trials("run", n=10)) == 2


def test_duplicate_trials_are_ignored(store):
    assert store.insert_trial("run", "mmd", 1, outcome(10, 0, m=100))
    assert not store.insert_trial("run", "mmd", 1, outcome(10, 0, m=999))
    assert store.query_trials("run")[0].m == 100


def test_runs_are_kept_apart(store):
    store.insert_trials("a", "mmd", 1, [outcome(10, 0), outcome(10, 1)])
    store.insert_trials("b", "wasserstein", None, [outcome(10, 0)])
    assert store.completed("a") == {(10, 0), (10, 1)}
    assert store.completed("b") == {(10, 0)}
    assert store.completed("c") == set()


def test_to_frame_and_delete(store):
    assert store.insert_trials("run", "mmd", 1, [outcome(10, 0), outcome(20, 0)]) == 2
    frame = store.to_frame("run")
    assert frame["n"].tolist() == [10, 20]
    assert store.delete_run("run") == 2
    assert store.query_trials("run") == []
