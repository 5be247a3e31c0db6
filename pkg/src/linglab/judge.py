"""HTTP client for an external yes/no fluency judge.

Sends one chat-completion request per candidate text and parses the first
yes/no token from the response body. Judging is optional and independent:
it attaches a fluency column to reports but never touches MSE numbers.
"""

from __future__ import annotations

import re
import time

import requests

from .errors import ConfigError

JUDGE_KEY_ENV = "LINGGEN_JUDGE_KEY"

FLUENCY_PROMPT_TEMPLATE = """The annotation task will provide texts created by different models.

Annotator is required to classify to answer whether the text is fluent or not fluent.

Fluency is defined as the ease and naturalness with which a text can be understood.

A fluent text should be straightforward to read or hear, without any structural or lexical awkwardness or ambiguity.

When evaluating fluency, annotators should consider two factors.

Grammaticality: Does the text follow standard grammatical rules?

Coherence: Does the text make sense in the context in which it is presented?

Here are some positive and negative samples corresponding to each factor.

First, Grammaticality.

Positive example: "The cat is sleeping peacefully on the soft, fluffy pillow." This text follows standard grammatical rules, with proper subject-verb agreement and adjective placement.

Negative example: "The cat are sleep peaceful on the soft pillow." This text contains grammatical errors, with a subject-verb disagreement and a missing adjective ending.

Second, Coherence.

Positive example: "After finishing her work, she decided to take a walk in the park." This text makes sense and flows logically, with a clear cause-and-effect relationship.

Negative example: "The concert was great, but I forgot my keys at home." This text lacks coherence, as there is no clear connection between the two clauses.

Annotators should not take into account the factual correctness or completeness of the text.

If the annotator finds it challenging to select a clear winner, they should select the text that is most similar in fluency to the other two texts.

Annotators should rely on their judgment and knowledge while assessing fluency, but consistency in their annotations should also be a priority.

Answer only using "yes" or "no", with no additional commentary or explanation.


Sentence: {}"""

_YES_NO = re.compile(r"\b(yes|no)\b", re.IGNORECASE)


def build_prompt(sentence: str) -> str:
    """Substitute the candidate sentence into the trailing slot of the template."""
    slot = "Sentence: {}"
    assert FLUENCY_PROMPT_TEMPLATE.endswith(slot)
    return FLUENCY_PROMPT_TEMPLATE[: -len("{}")] + sentence


def parse_verdict(body: str) -> str:
    """First case-insensitive yes/no token in the body, or 'unparseable'."""
    match = _YES_NO.search(body)
    if match is None:
        return "unparseable"
    return match.group(1).lower()


def judge_fluency(
    texts: list[str],
    url: str,
    model: str = "judge",
    api_key: str | None = None,
    timeout: float = 30.0,
    max_retries: int = 3,
    backoff: float = 0.5,
    session: requests.Session | None = None,
) -> dict:
    """Judge each text; returns counts, per-text verdicts, and the yes rate.

    Network failures retry up to ``max_retries`` times with exponential
    backoff, after which the sample is marked unjudged (never fatal).
    """
    if not url:
        raise ConfigError("judge endpoint URL is not configured")
    sess = session or requests.Session()
    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"

    verdicts = []
    for text in texts:
        payload = {
            "model": model,
            "messages": [{"role": "user", "content": build_prompt(text)}],
        }
        verdict = "unjudged"
        for attempt in range(max_retries):
            try:
                response = sess.post(url, json=payload, headers=headers, timeout=timeout)
                if response.status_code >= 400:
                    raise requests.HTTPError(f"status {response.status_code}")
                verdict = parse_verdict(response.text)
                break
            except requests.RequestException:
                if attempt + 1 < max_retries:
                    time.sleep(backoff * (2**attempt))
        verdicts.append(verdict)

    n_yes = verdicts.count("yes")
    n_no = verdicts.count("no")
    judged = n_yes + n_no
    return {
        "rate": (n_yes / judged) if judged else None,
        "n_yes": n_yes,
        "n_no": n_no,
        "n_unparseable": verdicts.count("unparseable"),
        "n_unjudged": verdicts.count("unjudged"),
        "verdicts": verdicts,
    }
