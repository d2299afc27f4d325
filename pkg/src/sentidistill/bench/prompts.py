"""Few-shot evaluation prompts for the 12 benchmark tasks.

Each prompt is one user message: the task instruction, then
"Sentence:/Label:" demonstration blocks from the dev split, then the query
sentence ending with a bare "Label:".  Stance prompts interpolate the query's
target into the instruction and annotate each demonstration label with its
own target.  Evaluation decoding is temperature 0.
"""

from __future__ import annotations

from typing import Sequence

from ..prompts.spec import GenParams, PromptSpec, make_prompt_id
from ..scoring.parse import serialize_tuples
from .data import TaskInstance
from .registry import DatasetSpec, get_spec

_LABEL_FROM = {
    2: "['negative', 'positive']",
    3: "['negative', 'positive', 'neutral']",
}

INSTRUCTIONS: dict[str, str] = {
    "imdb": (
        "Please perform Sentiment Analysis task. Given the sentence, assign a sentiment "
        "polarity label from ['negative', 'positive']. Return label only without any other text."
    ),
    "yelp2": (
        "Please perform Sentiment Analysis task. Given the sentence, assign a sentiment "
        "polarity label from ['negative', 'positive']. Return label only without any other text."
    ),
    "sst2": (
        "Please perform Sentiment Analysis task. Given the sentence, assign a sentiment "
        "polarity label from ['negative', 'positive']. Return label only without any other text."
    ),
    "twitter17": (
        "Please perform Sentiment Analysis task. Given the sentence, assign a sentiment "
        "polarity label from ['negative', 'positive', 'neutral']. Return label only without "
        "any other text."
    ),
    "irony18": (
        "Please perform Irony Detection task. Given the sentence, assign a sentiment label "
        "from ['irony', 'non-irony']. Return label only without any other text."
    ),
    "emotion20": (
        "Please perform Emotion Detection task. Given the sentence, assign a emotion label "
        "from ['anger', 'joy', 'sadness', 'optimism']. Return the label only without any "
        "other text."
    ),
    "pstance": (
        "Please perform Stance Detection task. Given the sentence, assign a sentiment label "
        "expressed by the author towards \"{target}\" from ['against', 'favor']. Return label "
        "only without any other text."
    ),
    "mint": (
        "Please perform Intimacy Detection task. Given the sentence, assign an intimacy label "
        "from ['not intimate', 'moderately intimate', 'highly intimate']. Return label only "
        "without any other text."
    ),
    "atsa": (
        "Please perform Aspect Term Sentiment Analysis task. Given the sentence, extract all "
        "(aspect term, sentiment polarity) pairs."
    ),
    "acsa": (
        "Please perform aspect-level sentiment analysis task. Given the sentence, tag all "
        "(aspect category, sentiment) pairs. Aspect category should be selected from "
        "['ambience general', 'drinks prices', 'drinks quality', 'drinks style_options', "
        "'food prices', 'food quality', 'food style_options', 'location general', "
        "'restaurant general', 'restaurant miscellaneous', 'restaurant prices', "
        "'service general'], and sentiment should be selected from ['negative', 'neutral', "
        "'positive']. If there are no target-sentiment pairs, return an empty list. "
        "Otherwise return a python list of tuples containing two strings in double quotes. "
        "Please return python list only, without any other comments or texts."
    ),
    "asqp": (
        "Please perform Aspect Sentiment Quad Prediction task. Given the sentence, extract "
        "all (aspect term, aspect category, opinion, sentiment polarity) quadruples.\n"
        "1. Aspect category should be selected from ['ambience general', 'drinks prices', "
        "'drinks quality', 'drinks style_options', 'food general', 'food prices', "
        "'food quality', 'food style_options', 'location general', 'restaurant general', "
        "'restaurant miscellaneous', 'restaurant prices', 'service general'].\n"
        "2. Sentiment polarity should be selected from ['negative', 'neutral', 'positive'].\n"
        "3. If there is no aspect term, use 'NULL' as the aspect term. Only aspect term can "
        "be 'NULL', aspect category, opinion and sentiment polarity CANNOT be 'NULL'.\n"
        "4. Please return python list only, without any other comments or texts."
    ),
    "ssa": (
        "Please perform the Structured Sentiment Analysis task. Given a sentence, extract "
        "all opinion tuples in the format (holder, target, sentiment expression, sentiment "
        "polarity).\n"
        "Each tuple should contain:\n"
        "- Holder: The entity expressing the sentiment, if there is no explicit holder, use "
        "'NULL' as the holder.\n"
        "- Target: The entity being evaluated, if there is no explicit target, use 'NULL' "
        "as the target.\n"
        "- Sentiment Expression: The phrase conveying the sentiment.\n"
        "- Sentiment Polarity: The polarity of the sentiment, either positive, negative, "
        "or neutral.\n"
        "Follow these rules:\n"
        "1. If there is no sentiment expression, return 'NULL' for all fields.\n"
        "2. Please return python list only, without any other comments or texts."
    ),
}

EVAL_DEMO_COUNT = 4
EVAL_TEMPERATURE = 0.0


def render_demo_label(spec: DatasetSpec, instance: TaskInstance) -> str:
    if spec.is_classification:
        if spec.needs_target:
            return f"{instance.label} (opinion towards '{instance.target}')"
        return str(instance.label)
    return serialize_tuples(instance.tuples or [])


def render_eval_prompt(task_id: str, instance: TaskInstance,
                       demos: Sequence[TaskInstance]) -> str:
    spec = get_spec(task_id)
    instruction = INSTRUCTIONS[task_id]
    if spec.needs_target:
        instruction = instruction.format(target=instance.target)
    blocks = [f"Sentence: {demo.text}\nLabel: {render_demo_label(spec, demo)}"
              for demo in demos]
    parts = [instruction, *blocks, f"Sentence: {instance.text}\nLabel:"]
    return "\n\n".join(parts)


def build_eval_prompt(task_id: str, instance: TaskInstance,
                      demos: Sequence[TaskInstance], seed: int = 0) -> PromptSpec:
    spec = get_spec(task_id)
    for demo in demos:
        if demo.instance_id == instance.instance_id:
            raise ValueError(f"query {instance.instance_id} appears among demonstrations")
    content = render_eval_prompt(task_id, instance, demos)
    demo_ids = [d.instance_id for d in demos]
    return PromptSpec(
        prompt_id=make_prompt_id(
            "eval", task=task_id, instance_id=instance.instance_id,
            demo_ids=demo_ids, seed=seed,
        ),
        stage="eval",
        messages=[{"role": "user", "content": content}],
        gen_params=GenParams(temperature=EVAL_TEMPERATURE, max_tokens=spec.max_gen_tokens),
        provenance={
            "stage": "eval",
            "task_id": task_id,
            "instance_id": instance.instance_id,
            "demo_ids": demo_ids,
            "seed": seed,
        },
    )
