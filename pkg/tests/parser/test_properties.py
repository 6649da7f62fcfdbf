from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from deepcite.models import document_to_json
from deepcite.parser import canonicalize, expand_numbered, mask_code, parse_document, segment_sentences

_WORDS = st.sampled_from(["alpha", "beta", "gamma", "delta", "river", "stone", "market", "growth", "signal"])


@st.composite
def _sentence(draw: st.DrawFn) -> str:
    words = draw(st.lists(_WORDS, min_size=1, max_size=6))
    return " ".join([words[0].capitalize(), *words[1:]])


@settings(max_examples=1000, deadline=None)
@given(st.lists(_sentence(), min_size=0, max_size=5), _sentence())
def test_uncited_sentences_inherit_the_final_citation(uncited: list[str], cited: str) -> None:
    body = " ".join([*(f"{sentence}." for sentence in uncited), f"{cited} [1]."])

    document = parse_document(f"{body}\n\n[1]: https://example.com/source\n")

    assert len(document.attributions) == len(uncited) + 1
    assert all(attribution.citation_ids == (1,) for attribution in document.attributions)
    assert document.attributions[-1].text_nocite == f"{cited}."


def test_every_small_range_expands_to_its_labels() -> None:
    for first in range(1, 10):
        for last in range(first, 10):
            assert expand_numbered(f"{first}-{last}") == [str(number) for number in range(first, last + 1)]


_VARIANT = st.tuples(
    st.sampled_from(["https", "HTTPS", "Https"]),
    st.booleans(),
    st.booleans(),
    st.sampled_from(["", "#top", "#section-2"]),
)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(_VARIANT, _VARIANT), min_size=50, max_size=50))
def test_url_variants_collapse_to_one_citation_each(variants: list[tuple[tuple[str, bool, bool, str], ...]]) -> None:
    paragraphs = []
    for index, pair in enumerate(variants):
        links = []
        for scheme, upper_host, explicit_port, fragment in pair:
            host = f"site{index}.example.org".upper() if upper_host else f"site{index}.example.org"
            port = ":443" if explicit_port else ""
            links.append(f"{scheme}://{host}{port}/page/{index}?q={index}{fragment}")
        paragraphs.append(f"Claim {index} [first]({links[0]}). Again [second]({links[1]}).")

    document = parse_document("\n\n".join(paragraphs))

    assert len(document.citations) == 50
    assert [citation.url for citation in document.citations] == [
        f"https://site{index}.example.org/page/{index}?q={index}" for index in range(50)
    ]


_MARKDOWNISH = st.text(alphabet=st.sampled_from(list("abc XYZ.!?[]()^-:#>*`123\n")), max_size=200)


@given(_MARKDOWNISH)
def test_canonicalize_is_idempotent(raw: str) -> None:
    assert canonicalize(canonicalize(raw)) == canonicalize(raw)


@given(_MARKDOWNISH)
def test_mask_code_keeps_offsets(raw: str) -> None:
    canonical = canonicalize(raw)

    masked = mask_code(canonical)

    assert len(masked.text) == len(canonical)
    assert [index for index, char in enumerate(masked.text) if char == "\n"] == [
        index for index, char in enumerate(canonical) if char == "\n"
    ]


@given(_MARKDOWNISH)
def test_sentences_cover_all_text_without_overlap(text: str) -> None:
    spans = segment_sentences(text)

    covered = set()
    previous_end = 0
    for start, end in spans:
        assert previous_end <= start < end
        previous_end = end
        covered.update(range(start, end))
    assert all(index in covered for index, char in enumerate(text) if not char.isspace())


@settings(deadline=None)
@given(_MARKDOWNISH)
def test_parsing_arbitrary_markdown_is_deterministic_and_consistent(raw: str) -> None:
    document = parse_document(raw)

    assert document_to_json(parse_document(raw)) == document_to_json(document)
    citation_ids = {citation.id for citation in document.citations}
    assert citation_ids == set(range(1, len(document.citations) + 1))
    assert [attribution.id for attribution in document.attributions] == list(range(1, len(document.attributions) + 1))
    for attribution in document.attributions:
        assert attribution.text_nocite
        assert set(attribution.citation_ids) <= citation_ids
        assert 0 <= attribution.span[0] < attribution.span[1]
