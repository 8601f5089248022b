import pytest

from specrag.docmodel import (
    AbbreviationGlossary,
    BlockKind,
    extract_abbreviations,
    parse_document,
)
from specrag.preprocess import (
    SftRecord,
    build_sft_dataset,
    expand_abbreviations,
    linearize_tables,
    load_sft_jsonl,
    resolve_references,
    write_sft_jsonl,
)

HSS_GLOSSARY = AbbreviationGlossary(entries={"HSS": "Home Subscriber Server"}, scope="TS1")


def doc_from(raw, doc_id="TS1"):
    return parse_document(raw, doc_id)


class TestLinearizeTables:
    def test_single_row_template(self):
        raw = "@table Request parameters\nParameter | Presence\nsupportedFeatures | Mandatory\n@end"
        out = linearize_tables(doc_from(raw))
        (block,) = out.blocks
        assert block.kind is BlockKind.PARAGRAPH
        assert block.text == (
            'In table "Request parameters", Parameter "supportedFeatures" '
            'has Presence "Mandatory".'
        )

    def test_document_without_tables_is_unchanged(self):
        doc = doc_from("# Scope\nJust text.")
        assert linearize_tables(doc) == doc

    def test_two_rows_in_order_matches_row_iteration_oracle(self):
        raw = "@table T\nName | Kind | Note\nn1 | k1 | a\nn2 | k2 | b\n@end"
        doc = doc_from(raw)
        table = doc.blocks[0].table
        # Independent oracle: iterate rows and build the sentences directly.
        oracle = " ".join(
            f'In table "T", Name "{row[0]}" has Kind "{row[1]}"; Note "{row[2]}".'
            for row in table.rows
        )
        out = linearize_tables(doc)
        assert out.blocks[0].text == oracle
        # Row order preserved: first sentence mentions n1, second n2.
        assert out.blocks[0].text.index('"n1"') < out.blocks[0].text.index('"n2"')

    def test_empty_table_notice(self):
        raw = "@table Empty one\nA | B\n@end"
        out = linearize_tables(doc_from(raw))
        assert out.blocks[0].text == 'Table "Empty one" is empty.'

    def test_no_table_blocks_remain_and_cells_verbatim(self, sample_doc_text):
        doc = doc_from(sample_doc_text, "TS23.002")
        out = linearize_tables(doc)
        assert all(b.kind is not BlockKind.TABLE for b in out.blocks)
        for b in doc.blocks:
            if b.table is not None:
                replacement = out.blocks[b.block_id].text
                for row in b.table.rows:
                    for cell in row:
                        assert cell in replacement

    def test_idempotent(self, sample_doc_text):
        doc = doc_from(sample_doc_text, "TS23.002")
        once = linearize_tables(doc)
        assert linearize_tables(once) == once

    def test_single_column_table(self):
        raw = "@table Flags\nFlag\nenabled\n@end"
        out = linearize_tables(doc_from(raw))
        assert out.blocks[0].text == 'In table "Flags", Flag "enabled".'


class TestExpandAbbreviations:
    def test_paper_example(self):
        doc = doc_from("The HSS stores subscriptions.")
        out = expand_abbreviations(doc, [HSS_GLOSSARY])
        assert out.blocks[0].text == "The Home Subscriber Server (HSS) stores subscriptions."

    def test_unknown_token_unchanged(self):
        doc = doc_from("QXZ is not known.")
        out = expand_abbreviations(doc, [AbbreviationGlossary(entries={})])
        assert out.blocks[0].text == "QXZ is not known."

    def test_all_occurrences_expanded(self):
        import re

        doc = doc_from("HSS talks to HSS.")
        out = expand_abbreviations(doc, [HSS_GLOSSARY])
        # Independent oracle: whole-word regex replacement over the fixture.
        oracle = re.sub(r"\bHSS\b", "Home Subscriber Server (HSS)", "HSS talks to HSS.")
        assert out.blocks[0].text == oracle

    def test_idempotent(self):
        doc = doc_from("The HSS stores subscriptions. HSS again.")
        once = expand_abbreviations(doc, [HSS_GLOSSARY])
        twice = expand_abbreviations(once, [HSS_GLOSSARY])
        assert twice == once

    def test_idempotent_with_nested_expansions(self):
        glossary = AbbreviationGlossary(
            entries={
                "MBSFN": "MBMS single-frequency network",
                "MBMS": "Multimedia Broadcast Multicast Service",
            }
        )
        doc = doc_from("MBSFN areas are configured.")
        once = expand_abbreviations(doc, [glossary])
        assert once.blocks[0].text == (
            "MBMS single-frequency network (MBSFN) areas are configured."
        )
        assert expand_abbreviations(once, [glossary]) == once

    def test_whole_word_only(self):
        doc = doc_from("The HSSX and e-HSS stay; HSS, goes.")
        out = expand_abbreviations(doc, [HSS_GLOSSARY])
        assert out.blocks[0].text == (
            "The HSSX and e-HSS stay; Home Subscriber Server (HSS), goes."
        )

    def test_first_matching_glossary_wins(self):
        doc_scoped = AbbreviationGlossary(entries={"PCF": "Policy Control Function"}, scope="TS1")
        global_glossary = AbbreviationGlossary(entries={"PCF": "Packet Control Function"})
        doc = doc_from("The PCF decides.")
        out = expand_abbreviations(doc, [doc_scoped, global_glossary])
        assert out.blocks[0].text == "The Policy Control Function (PCF) decides."

    def test_abbreviations_section_untouched(self, sample_doc_text):
        doc = doc_from(sample_doc_text, "TS23.002")
        glossary = extract_abbreviations(doc)
        out = expand_abbreviations(doc, [glossary])
        first, last = doc.glossary_section_range
        assert doc.blocks[first : last + 1] == out.blocks[first : last + 1]
        # ... and the body paragraph did change.
        assert "Home Subscriber Server (HSS)" in "\n".join(
            b.text for b in out.blocks if b.kind is BlockKind.PARAGRAPH
        )

    def test_table_cells_expanded_when_tables_remain(self):
        raw = "@table Nodes\nNode | Role\nHSS | subscriber data\n@end"
        out = expand_abbreviations(doc_from(raw), [HSS_GLOSSARY])
        assert out.blocks[0].table.rows == [["Home Subscriber Server (HSS)", "subscriber data"]]

    def test_headings_never_expanded(self):
        doc = doc_from("# HSS overview\nHSS here.")
        out = expand_abbreviations(doc, [HSS_GLOSSARY])
        assert out.blocks[0].text == "HSS overview"
        assert out.blocks[1].text == "Home Subscriber Server (HSS) here."


class TestResolveReferences:
    def test_resolved_against_registry(self):
        raw = "# References\n[2] 3GPP TS 23.002, Network architecture"
        doc = doc_from(raw, "TS23.003")
        registry = {"TS23.002": doc_from("# X\ny", "TS23.002"), "TS23.003": doc}
        resolution = resolve_references(doc, registry)
        (ref,) = resolution.references
        assert ref.ref_label == "[2]"
        assert ref.resolved is True
        assert ref.target_doc_id == "TS23.002"

    def test_no_references_section(self):
        doc = doc_from("# Scope\nNothing.")
        assert resolve_references(doc, {}).references == []

    def test_unresolved_reference_has_no_target(self):
        raw = "# References\n[3] 3GPP TS 99.999"
        doc = doc_from(raw, "TS1")
        (ref,) = resolve_references(doc, {}).references
        assert ref.resolved is False
        assert ref.target_doc_id is None
        assert ref.identifier == "TS99.999"

    def test_tr_identifiers_and_non_3gpp_entries(self):
        raw = "# References\n[1] 3GPP TR 38.901, Channel model\n[2] IETF RFC 3261"
        doc = doc_from(raw, "TS1")
        refs = resolve_references(doc, {"TR38.901": doc}).references
        assert refs[0].resolved is True
        assert refs[0].target_doc_id == "TR38.901"
        assert refs[1].resolved is False
        assert refs[1].identifier is None


class TestBuildSftDataset:
    def test_paper_example(self):
        records = build_sft_dataset([HSS_GLOSSARY], [])
        assert records == [
            SftRecord(question="What is HSS?", answer="Home Subscriber Server", origin="abbreviation")
        ]

    def test_empty_inputs(self):
        assert build_sft_dataset([], []) == []

    def test_identical_entries_deduplicated(self):
        g1 = AbbreviationGlossary(entries={"NEF": "Network Exposure Function"})
        g2 = AbbreviationGlossary(entries={"NEF": "Network Exposure Function"})
        records = build_sft_dataset([g1, g2], [])
        assert len(records) == 1

    def test_ordering_abbreviations_sorted_then_manual(self):
        glossary = AbbreviationGlossary(
            entries={"UPF": "User Plane Function", "AMF": "Access and Mobility Management Function"}
        )
        manual = [
            SftRecord(question="Q manual 2", answer="A2", origin="manual"),
            SftRecord(question="Q manual 1", answer="A1", origin="manual"),
        ]
        records = build_sft_dataset([glossary], manual)
        assert [r.question for r in records] == [
            "What is AMF?",
            "What is UPF?",
            "Q manual 2",
            "Q manual 1",
        ]

    def test_jsonl_round_trip(self, tmp_path):
        records = build_sft_dataset(
            [HSS_GLOSSARY], [SftRecord(question="Who?", answer="Me", origin="manual")]
        )
        path = tmp_path / "sft.jsonl"
        write_sft_jsonl(records, path)
        assert load_sft_jsonl(path) == records

    def test_record_validation(self):
        with pytest.raises(ValueError):
            SftRecord(question="", answer="x", origin="manual")
        with pytest.raises(ValueError):
            SftRecord(question="x", answer="", origin="manual")
