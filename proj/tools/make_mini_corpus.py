#!/usr/bin/env python3
# Copyright 2026 The finegrain Authors
# SPDX-License-Identifier: Apache-2.0
"""Regenerates data/mini_corpus from the authored tables below.

LLM fixtures are keyed by the hash of the rendered prompt, which only the C++
side computes, so the script drives `fgeval qgen` with a miss log until every
prompt has a canned response. Answers, backend logprobs and references are
then derived from a fixed seed.

Usage: tools/make_mini_corpus.py build/tools/fgeval
"""

import json
import math
import pathlib
import random
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS = ROOT / "data" / "mini_corpus"
ICL = ROOT / "data" / "templates" / "icl_v1.json"

ENTITIES = {
    "a dog chases a red ball across a sunny park":
        "```json\n"
        '[{"name": "dog", "attributes": [], "actions": ["chases"]}, '
        '{"name": "red ball", "attributes": ["red"], "actions": []}, '
        '{"name": "park", "attributes": ["sunny"], "actions": []}]\n'
        "```",
    "a glass vase of sunflowers stands on a wooden table":
        '[{"name": "vase", "attributes": ["glass"], "actions": ["stands"]}, '
        '{"name": "table", "attributes": ["wooden"], "actions": []}]',
}

QUESTIONS = {
    ("dog", "visual_quality"):
        "Q1: [POS] Is the dog's fur rendered with clear detail?\n"
        "Q2: [NEG] Is the dog's body distorted or blurry?",
    ("dog", "text_alignment"): "Q1: [POS] Is the dog chasing the ball?",
    ("dog", "temporal_consistency"):
        "Q1: [POS] Does the dog keep the same appearance throughout the video?",
    ("dog", "factual_consistency"):
        "Q1: [POS] Does the dog have four legs?\n"
        "Q2: Does the dog run in a physically impossible way? [NEG]",
    ("dog", "dynamic_degree"): "Q1: [POS] Is the dog visibly running?",
    ("red ball", "visual_quality"): "Q1: [POS] Is the ball's surface sharp and clean?",
    ("red ball", "text_alignment"): "Q1: [POS] Is the ball red?",
    ("red ball", "temporal_consistency"): "Q1: [NEG] Does the ball change color during the video?",
    ("red ball", "factual_consistency"): "Q1: Does the ball roll in a physically plausible way?",
    ("red ball", "dynamic_degree"): "Q1: [POS] Is the ball moving?",
    ("park", "visual_quality"): "Q1: [POS] Is the park scenery free of artifacts?",
    ("park", "text_alignment"): "Q1: [POS] Is the park sunny?",
    ("park", "temporal_consistency"): "Q1: [POS] Does the park background stay stable?",
    ("park", "factual_consistency"):
        "Here are the questions.\n"
        "Q1: [NEG] Do shadows in the park point in inconsistent directions?",
    ("park", "dynamic_degree"): "The park is a static background, so no motion questions apply.",
    ("vase", "visual_quality"): "Q1: [POS] Is the glass vase rendered with clear reflections?",
    ("vase", "text_alignment"): "Q1: [POS] Does the vase hold sunflowers?",
    ("vase", "temporal_consistency"): "Q1: [POS] Does the vase keep its shape throughout the video?",
    ("vase", "factual_consistency"): "Q1: [NEG] Does the vase float above the table?",
    ("vase", "dynamic_degree"): "Q1: [NEG] Does the vase move on its own?",
    ("table", "visual_quality"): "Q1: [POS] Is the wood grain of the table clearly visible?",
    ("table", "text_alignment"): "Q1: [POS] Is the table wooden?",
    ("table", "temporal_consistency"):
        "Q1: [POS] Does the table keep the same shape throughout the video?",
    ("table", "factual_consistency"):
        "Q1: [POS] Does the table align with real-world characteristics, such as standing "
        "steadily on its legs?",
    ("table", "dynamic_degree"): "Q1: [NEG] Does the table move on its own?",
}

# Probability that a positive question is answered Yes for each video.
QUALITY = {"v1": 0.9, "v2": 0.6, "v3": 0.35, "v4": 0.8, "v5": 0.45}
# v3's backend cannot return logprobs.
NO_LOGPROBS = {"v3"}
# Per-item faults: an injected backend error and a response without a reason.
BACKEND_ERRORS = {"v5:p2-table-dynamic_degree-1"}
MISSING_REASON = {"v2:p1-dog-text_alignment-1"}


def line(obj):
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def task_fields(rendered):
    task = rendered.split("### Task\n", 1)[1]
    fields = {}
    for row in task.splitlines():
        if ": " in row:
            key, value = row.split(": ", 1)
            fields[key] = value
    return fields


def canned(miss):
    fields = task_fields(miss["rendered_prompt"])
    template = miss["template_id"]
    if template.startswith("entity_extraction/"):
        return ENTITIES[fields["Prompt"]]
    dimension = template.split("/")[1]
    return QUESTIONS[(fields["Entity"], dimension)]


def fill_llm_fixtures(fgeval):
    llm = CORPUS / "llm" / "llm.jsonl"
    llm.parent.mkdir(parents=True, exist_ok=True)
    llm.write_text("")
    miss_log = CORPUS / "llm" / "misses.tmp"
    known = []
    for _ in range(4):
        miss_log.unlink(missing_ok=True)
        subprocess.run([fgeval, "qgen", "--prompts", CORPUS / "prompts.jsonl", "--icl", ICL,
                        "--llm", f"mock:{llm.parent}", "--miss-log", miss_log, "--retries", "1",
                        "--out", miss_log.with_suffix(".q")], check=False, capture_output=True)
        if not miss_log.exists():
            break
        for raw in miss_log.read_text().splitlines():
            miss = json.loads(raw)
            known.append({"schema_version": 1, "prompt_hash": miss["prompt_hash"],
                          "text": canned(miss)})
        known.sort(key=lambda e: e["prompt_hash"])
        llm.write_text("".join(line(e) + "\n" for e in known))
    miss_log.unlink(missing_ok=True)
    miss_log.with_suffix(".q").unlink(missing_ok=True)


def tokens_for(answer, reason):
    toks = ["<answer>", answer, "</answer>", "<reason>"]
    if reason:
        words = reason.split(" ")
        toks.append(words[0])
        toks.extend(" " + w for w in words[1:])
    toks.append("</reason>")
    return toks


def backend_entry(qid, p_yes, answer, reason, with_logprobs):
    entry = {"schema_version": 1, "question_id": qid}
    raw = f"<answer>{answer}</answer><reason>{reason}</reason>"
    entry["raw_text"] = raw
    if not with_logprobs:
        entry["per_token"] = []
        return entry
    per_token = []
    for tok in tokens_for(answer, reason):
        per_token.append({"token": tok, "logprob": -0.01, "top_k": []})
    top = [("Yes", 0.93 * p_yes), ("No", 0.93 * (1 - p_yes)), (" Yes", 0.03 * p_yes),
           (" No", 0.03 * (1 - p_yes)), ("Maybe", 0.04)]
    top.sort(key=lambda t: -t[1])
    chosen = dict(top)[answer]
    per_token[1] = {"token": answer, "logprob": round(math.log(chosen), 6),
                    "top_k": [{"token": t, "logprob": round(math.log(p), 6)} for t, p in top]}
    entry["per_token"] = per_token
    return entry


def main():
    fgeval = sys.argv[1]
    fill_llm_fixtures(fgeval)
    subprocess.run([fgeval, "qgen", "--prompts", CORPUS / "prompts.jsonl", "--icl", ICL,
                    "--llm", f"mock:{CORPUS / 'llm'}", "--videos", CORPUS / "videos.jsonl",
                    "--out", CORPUS / "questions.jsonl",
                    "--report", CORPUS / "qgen-report.json"], check=False, capture_output=True)

    rng = random.Random(7)
    questions = [json.loads(r) for r in (CORPUS / "questions.jsonl").read_text().splitlines()]
    annotations, backend = [], []
    for q in questions:
        good = rng.random() < QUALITY[q["video_id"]]
        truth_yes = good if q["polarity"] == 1 else not good
        truth = "Yes" if truth_yes else "No"
        annotations.append({"schema_version": 1, "question_id": q["question_id"],
                            "answer": truth})
        if q["question_id"] in BACKEND_ERRORS:
            backend.append({"schema_version": 1, "question_id": q["question_id"],
                            "error": "injected backend failure"})
            continue
        correct = rng.random() < 0.85
        confidence = rng.uniform(0.7, 0.97) if correct else rng.uniform(0.55, 0.8)
        said_yes = truth_yes if correct else not truth_yes
        p_yes = round(confidence if said_yes else 1 - confidence, 4)
        answer = "Yes" if said_yes else "No"
        reason = "" if q["question_id"] in MISSING_REASON else (
            "The frames show this clearly." if said_yes else "The frames do not show this.")
        backend.append(backend_entry(q["question_id"], p_yes, answer, reason,
                                     q["video_id"] not in NO_LOGPROBS))

    (CORPUS / "annotations.jsonl").write_text("".join(line(a) + "\n" for a in annotations))
    (CORPUS / "backend").mkdir(exist_ok=True)
    (CORPUS / "backend" / "backend.jsonl").write_text("".join(line(b) + "\n" for b in backend))

    mos = {"v1": 4.4, "v2": 3.1, "v3": 2.2, "v4": 3.9, "v5": 2.6}
    (CORPUS / "mos.jsonl").write_text("".join(
        line({"schema_version": 1, "video_id": v, "mos": m}) + "\n" for v, m in mos.items()))
    prefs = [("pr1", "v1", "v2", "win"), ("pr2", "v1", "v3", "win"), ("pr3", "v3", "v2", "lose"),
             ("pr4", "v4", "v5", "win"), ("pr5", "v2", "v5", "tie")]
    (CORPUS / "prefs.jsonl").write_text("".join(
        line({"schema_version": 1, "pair_id": p, "video_a": a, "video_b": b, "label": l}) + "\n"
        for p, a, b, l in prefs))


if __name__ == "__main__":
    main()
