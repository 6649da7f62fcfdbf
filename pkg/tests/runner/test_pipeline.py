from __future__ import annotations

import asyncio

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deepcite.events import EventEmitter, EventKind, InMemoryEventSink
from deepcite.fetch import FetchCategory
from deepcite.metrics import metrics_from_documents
from deepcite.models import ALL_DIMENSIONS, Dimension, EvalFlag, document_to_json
from deepcite.parser import parse_document
from deepcite.runner import PipelineRunner, RunConfig, run_pipeline
from tests.utils import FixedJudge, StaticFetcher, failed_outcome, make_document, ok_outcome

REPORT = """Solar output doubled in 2023 [1]. Wind capacity also grew [2].

[1]: https://energy.example/solar
[2]: https://energy.example/wind
"""


def _outcomes_for(report: str, *failures) -> dict:
    urls = [citation.url for citation in parse_document(report).citations]
    outcomes = {url: ok_outcome(f"Text from {url}") for url in urls}
    for index, outcome in failures:
        outcomes[urls[index]] = outcome
    return outcomes


def test_run_config_defaults() -> None:
    config = RunConfig()

    assert (config.evaluator_concurrency, config.agent_concurrency) == (15, 10)
    assert config.dimensions == ALL_DIMENSIONS
    assert config.judge == {"backend": "heuristic"}


def test_run_config_orders_and_deduplicates_dimensions() -> None:
    config = RunConfig(dimensions=(Dimension.FACT_CHECK, Dimension.LINK_WORKS, Dimension.FACT_CHECK))

    assert config.dimensions == (Dimension.LINK_WORKS, Dimension.FACT_CHECK)


@pytest.mark.parametrize(
    "kwargs",
    [{"dimensions": ()}, {"evaluator_concurrency": 0}, {"agent_concurrency": 0}, {"tool_call_budget": 0}],
)
def test_run_config_rejects_invalid_values(kwargs: dict) -> None:
    with pytest.raises(ValueError):
        RunConfig(**kwargs)


def test_config_echo_leaves_out_secrets() -> None:
    config = RunConfig(judge={"backend": "remote", "model": "m", "api_key": "sk-x", "api_key_env": "KEY"})

    echo = config.to_dict()

    assert echo["judge"] == {"backend": "remote", "model": "m", "api_key_env": "KEY"}
    assert echo["dimensions"] == ["link_works", "relevant_content", "fact_check"]
    assert "sk-x" not in str(echo)


def test_run_pipeline_evaluates_every_pair_on_every_dimension() -> None:
    fetcher = StaticFetcher(_outcomes_for(REPORT))

    document = asyncio.run(run_pipeline(REPORT, fetcher=fetcher, judge=FixedJudge(1, "Supported.")))

    assert len(document.citations) == 2
    assert len(document.attributions) == 2
    assert [(result.attribution_id, result.citation_id, result.dimension) for result in document.evals] == [
        (1, 1, Dimension.LINK_WORKS),
        (1, 1, Dimension.RELEVANT_CONTENT),
        (1, 1, Dimension.FACT_CHECK),
        (2, 2, Dimension.LINK_WORKS),
        (2, 2, Dimension.RELEVANT_CONTENT),
        (2, 2, Dimension.FACT_CHECK),
    ]
    assert all(result.score == 1 for result in document.evals)
    assert sorted(fetcher.calls) == sorted(citation.url for citation in document.citations)


def test_failed_fetches_flow_through_to_the_evaluations() -> None:
    outcomes = _outcomes_for(REPORT, (1, failed_outcome(FetchCategory.HTTP_ERROR, 404)))
    judge = FixedJudge()

    document = asyncio.run(run_pipeline(REPORT, fetcher=StaticFetcher(outcomes), judge=judge))

    second = [result for result in document.evals if result.citation_id == 2]
    assert [result.score for result in second] == [0, None, None]
    assert second[1].flags == frozenset({EvalFlag.FETCH_FAILED})
    assert len(judge.prompts) == 2


def test_each_citation_is_fetched_once_even_when_cited_repeatedly() -> None:
    fetcher = StaticFetcher({f"https://example.com/source-{index}": ok_outcome() for index in (1, 2)})

    async def scenario():
        runner = PipelineRunner(RunConfig(), fetcher=fetcher, judge=FixedJudge())
        return await runner.evaluate_document(make_document([[1, 2], [2], [1]]))

    document = asyncio.run(scenario())

    assert sorted(fetcher.calls) == ["https://example.com/source-1", "https://example.com/source-2"]
    assert len(document.evals) == 4 * 3


def test_restricting_dimensions_skips_the_judge() -> None:
    judge = FixedJudge()
    config = RunConfig(dimensions=(Dimension.LINK_WORKS,))

    document = asyncio.run(run_pipeline(REPORT, config, fetcher=StaticFetcher(_outcomes_for(REPORT)), judge=judge))

    assert {result.dimension for result in document.evals} == {Dimension.LINK_WORKS}
    assert judge.prompts == []


@pytest.mark.parametrize("limit", [1, 4, 15])
def test_fetches_and_judge_calls_respect_the_evaluator_bound(limit: int) -> None:
    count = 40
    fetcher = StaticFetcher({f"https://example.com/source-{index}": ok_outcome() for index in range(1, count + 1)}, delay=0.005)
    judge = FixedJudge(delay=0.005)

    async def scenario():
        runner = PipelineRunner(RunConfig(evaluator_concurrency=limit), fetcher=fetcher, judge=judge)
        return await runner.evaluate_document(make_document([[index] for index in range(1, count + 1)]))

    document = asyncio.run(scenario())

    assert fetcher.peak == limit
    assert judge.peak <= limit
    assert len(document.evals) == count * 3


def test_results_do_not_depend_on_concurrency() -> None:
    outcomes = _outcomes_for(REPORT, (0, failed_outcome(FetchCategory.RATE_LIMITED, 429, attempts=6)))

    def evaluate(limit: int) -> str:
        config = RunConfig(evaluator_concurrency=limit)
        fetcher = StaticFetcher(outcomes, delay=0.001)
        return document_to_json(asyncio.run(run_pipeline(REPORT, config, fetcher=fetcher, judge=FixedJudge(0, "No."))))

    assert evaluate(1) == evaluate(15)


def test_runner_emits_progress_events() -> None:
    sink = InMemoryEventSink()

    async def scenario():
        runner = PipelineRunner(
            RunConfig(run_id="events"),
            fetcher=StaticFetcher(_outcomes_for(REPORT)),
            judge=FixedJudge(),
            events=EventEmitter(sink, "events"),
        )
        return await runner.run_pipeline(REPORT, origin="report.md")

    asyncio.run(scenario())

    assert len(sink.of_kind(EventKind.CITATION_FETCHED)) == 2
    assert len(sink.of_kind(EventKind.PAIR_EVALUATED)) == 6
    (completed,) = sink.of_kind(EventKind.DOCUMENT_COMPLETED)
    assert completed.payload == {"origin": "report.md", "citations": 2, "attributions": 2, "evals": 6}
    assert [event.sequence for event in sink.events] == list(range(1, 10))
    assert {event.run_id for event in sink.events} == {"events"}


def test_runner_only_closes_fetchers_it_built() -> None:
    fetcher = StaticFetcher()

    async def scenario() -> None:
        runner = PipelineRunner(RunConfig(), fetcher=fetcher, judge=FixedJudge())
        await runner.aclose()

    asyncio.run(scenario())

    assert not fetcher.closed


def test_reports_without_citations_produce_no_evaluations() -> None:
    fetcher = StaticFetcher()

    document = asyncio.run(run_pipeline("Just prose with no sources.\n", fetcher=fetcher, judge=FixedJudge()))

    assert document.evals == ()
    assert fetcher.calls == []
    assert not document.has_pairs


_OUTCOMES = st.sampled_from(["ok", "404", "429"])


@settings(max_examples=100, deadline=None)
@given(
    st.integers(min_value=1, max_value=4).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.lists(st.lists(st.integers(min_value=1, max_value=n), min_size=1, max_size=3), min_size=1, max_size=5),
            st.lists(_OUTCOMES, min_size=n, max_size=n),
        )
    ),
    st.sets(st.sampled_from(ALL_DIMENSIONS), min_size=1),
    st.sampled_from([0, 1]),
)
def test_eval_count_and_metrics_match_a_naive_recount(case, dimensions, score: int) -> None:
    n_citations, claims, kinds = case
    outcomes = {
        f"https://example.com/source-{index}": ok_outcome()
        if kind == "ok"
        else failed_outcome(FetchCategory.HTTP_ERROR, 404)
        if kind == "404"
        else failed_outcome(FetchCategory.RATE_LIMITED, 429, attempts=6)
        for index, kind in enumerate(kinds, start=1)
    }

    async def scenario():
        runner = PipelineRunner(RunConfig(dimensions=tuple(dimensions)), fetcher=StaticFetcher(outcomes), judge=FixedJudge(score))
        return await runner.evaluate_document(make_document(claims, n_citations=n_citations))

    document = asyncio.run(scenario())
    pair_citations = [citation_id for ids in claims for citation_id in sorted(set(ids))]

    assert len(document.evals) == len(pair_citations) * len(dimensions)
    report = metrics_from_documents([document], label="oracle")
    for dimension in dimensions:
        reachable = [kinds[citation_id - 1] == "ok" for citation_id in pair_citations]
        if dimension is Dimension.LINK_WORKS:
            expected = (sum(reachable), len(reachable) - sum(reachable), 0)
        else:
            judged = sum(reachable)
            expected = (judged * score, judged * (1 - score), len(reachable) - judged)
        stats = report.stats(dimension)
        assert (stats.passed, stats.failed, stats.not_evaluated) == expected
