#!/usr/bin/env python3
"""Regenerates the synthetic 20-document fixture under data/fixture/.

Deterministic: running it twice produces identical files.
"""
import json
import os
import random

ROOT = os.path.join(os.path.dirname(__file__), "..", "data", "fixture")

PROVINCES = ["北京", "天津", "河北", "山西"]
HANZI_MONTHS = {
    6: "六个月", 8: "八个月", 10: "十个月", 12: "一年", 14: "一年二个月",
    18: "一年六个月", 24: "二年", 36: "三年", 60: "五年",
}

rng = random.Random(20240501)


def duration_text(months):
    return HANZI_MONTHS[months]


def make_doc(i):
    """One synthetic judgment with gold features."""
    name = "王某" if i % 3 == 0 else ("李某" if i % 3 == 1 else "张某")
    months = rng.choice(sorted(HANZI_MONTHS))
    light = rng.randint(1, 3)
    fine = rng.choice([2000, 5000, 10000, 20000])
    comp = rng.choice([0, 8000, 15000, 30000])
    surrender = rng.random() < 0.5
    probation = rng.random() < 0.4
    probation_months = months + 12

    features = {
        "有期徒刑": duration_text(months),
        "轻伤人数": str(light),
        "罚金": str(fine),
        "自首": "是" if surrender else "否",
    }
    if comp > 0:
        features["赔偿金额"] = str(comp)
    if probation:
        features["缓刑"] = duration_text(probation_months) if probation_months in HANZI_MONTHS \
            else str(probation_months) + "个月"

    mitigation = "其有自首情节，依法从轻处罚" if surrender else "其到案后如实供述，酌情从轻处罚"
    comp_clause = f"被告人已赔偿被害人经济损失人民币{comp}元，取得谅解。" if comp > 0 else ""
    probation_clause = f"，缓刑{probation_months}个月" if probation else ""

    body = (
        f"{PROVINCES[i % 4]}市某区人民法院刑事判决书（2021）某刑初字第{100 + i}号。"
        f"公诉机关某区人民检察院。被告人{name}，男。"
        f"本院查明：2021年{1 + i % 12}月某日，被告人{name}因琐事与被害人发生争执，"
        f"持械殴打被害人，致{light}人轻伤二级。案发后{name}"
        f"{'主动投案并如实供述' if surrender else '被公安机关抓获'}。{comp_clause}"
        f"本院认为：被告人{name}故意伤害他人身体，其行为已构成故意伤害罪。{mitigation}。"
        f"判决如下：被告人{name}犯故意伤害罪，判处有期徒刑{duration_text(months)}"
        f"{probation_clause}，并处罚金人民币{fine}元。"
    )
    return body, features


def perturb_pred(doc_id, features, i):
    """Simulated model output: mostly right, with typical failure modes."""
    pred = {}
    for name, value in features.items():
        if name in ("有期徒刑", "缓刑"):
            # predictions arrive in plain month numbers
            months = hanzi_to_months(value)
            if i % 7 == 3 and name == "有期徒刑":
                pred[name] = str(months // 12)  # unit error: years not converted
            else:
                pred[name] = str(months)
        else:
            pred[name] = value
    if i % 5 == 2 and "自首" in pred:
        del pred["自首"]  # missed element
    if i % 8 == 5:
        pred["无不良影响"] = "是"  # hallucinated element
    return pred


def hanzi_to_months(text):
    for months, rendered in HANZI_MONTHS.items():
        if rendered == text:
            return months
    assert text.endswith("个月")
    return int(text[:-2])


LAWS = [
    ("刑法第一条", "为了惩罚犯罪，保护人民，根据宪法，结合我国同犯罪作斗争的具体经验及实际情况，制定本法。"),
    ("刑法第二条", "中华人民共和国刑法的任务，是用刑罚同一切犯罪行为作斗争，以保卫国家安全，保卫人民民主专政的政权和社会主义制度。"),
    ("刑法第十三条", "一切危害国家主权、领土完整和安全的行为，依照法律应当受刑罚处罚的，都是犯罪。"),
    ("刑法第二百三十四条", "故意伤害他人身体的，处三年以下有期徒刑、拘役或者管制。致人重伤的，处三年以上十年以下有期徒刑。"),
    ("刑法第六十七条", "犯罪以后自动投案，如实供述自己的罪行的，是自首。对于自首的犯罪分子，可以从轻或者减轻处罚。"),
    ("刑法第七十二条", "对于被判处拘役、三年以下有期徒刑的犯罪分子，同时符合下列条件的，可以宣告缓刑。"),
]


def main():
    docs_dir = os.path.join(ROOT, "docs")
    os.makedirs(docs_dir, exist_ok=True)

    meta_rows, gold_rows, pred_rows, labeled_rows = [], [], [], []
    for i in range(20):
        doc_id = f"doc{i + 1:03d}"
        body, features = make_doc(i)
        with open(os.path.join(docs_dir, doc_id + ".txt"), "w", encoding="utf-8") as f:
            f.write(body)

        if i == 17:
            doc_type, year = "ruling", 2021      # filtered: ruling
        elif i == 18:
            doc_type, year = "judgment", 2019    # filtered: too old
        elif i == 19:
            doc_type, year = "other", 2022       # filtered: other type
        else:
            doc_type, year = "judgment", 2020 + i % 4

        province = PROVINCES[i % 4]
        meta_rows.append({
            "id": doc_id, "doc_type": doc_type, "year": year,
            "province": province, "crime_type": "故意伤害罪", "procedure": "一审",
            "features": features,
        })
        if doc_type == "judgment" and year >= 2020:
            gold_rows.append({"id": doc_id, "group": province, "elements": features})
            pred_rows.append({"id": doc_id, "elements": perturb_pred(doc_id, features, i)})
            labeled_rows.append({
                "id": doc_id, "text": body, "true_elements": sorted(features),
            })

    def write_jsonl(name, rows):
        with open(os.path.join(ROOT, name), "w", encoding="utf-8") as f:
            for row in rows:
                f.write(json.dumps(row, ensure_ascii=False) + "\n")

    write_jsonl("meta.jsonl", meta_rows)
    write_jsonl("gold.jsonl", gold_rows)
    write_jsonl("pred.jsonl", pred_rows)
    write_jsonl("labeled_docs.jsonl", labeled_rows)
    write_jsonl("laws.jsonl", [{"id": i, "text": t} for i, t in LAWS])

    # Continuation task over the stub-QA alphabet: prompted with 摘要编号, a
    # conformant continuation is a digit run closed by ）. The SFT stage
    # teaches those bigrams, so GRPO sees a varying, improvable reward.
    format_task = {
        "template_text": "[编号]）",
        "required_slots": ["编号"],
        "slot_patterns": {"编号": "[0-9]+"},
    }
    with open(os.path.join(ROOT, "format_task.json"), "w", encoding="utf-8") as f:
        json.dump(format_task, f, ensure_ascii=False, indent=2)
        f.write("\n")

    config = {
        "seed": 42,
        "out_dir": "out/fixture_run",
        "stages": {"corpus": True, "augment": True, "sft": True,
                   "grpo": True, "retrieve": True, "eval": True},
        "corpus": {"in_dir": "data/fixture/docs", "meta": "data/fixture/meta.jsonl",
                   "min_year": 2020},
        "augment": {"laws": "data/fixture/laws.jsonl", "num_qa": 2},
        "sft": {"steps": 150, "lr": 0.5, "grad_accum": 4, "max_vocab": 512},
        "grpo": {"reward": "combined", "G": 8, "eps": 0.2, "beta": 0.01,
                 "lr": 0.1, "updates": 30, "max_len": 12, "query": "摘要编号",
                 "format_spec": "data/fixture/format_task.json"},
        "retrieve": {"data": "data/fixture/labeled_docs.jsonl", "max_chunk_tokens": 64},
        "eval": {"gold": "data/fixture/gold.jsonl", "pred": "data/fixture/pred.jsonl"},
        "client": {"timeout_ms": 10000},
        "embed": {"dim": 256},
        "stub": True,
    }
    with open(os.path.join(ROOT, "pipeline.json"), "w", encoding="utf-8") as f:
        json.dump(config, f, ensure_ascii=False, indent=2)
        f.write("\n")
    print(f"wrote fixture with {len(meta_rows)} docs ({len(gold_rows)} kept)")


if __name__ == "__main__":
    main()
