"""
Text format for trained models.

The first line is the version header ``strokeminer-model v1``; the rest is an
indented JSON document with sorted keys. Split attributes are stored by schema
name and thresholds as shortest round-trip floats, so a model read back routes
every input exactly as the original did.
"""
import json
import logging
from typing import Union

import numpy as np

from strokeminer.learners.c45 import C45Params, DecisionTree, Internal, Leaf
from strokeminer.learners.naivebayes import NaiveBayesModel
from strokeminer.learners.nbtree import NBInternal, NBLeaf, NBTree, NBTreeParams
from strokeminer.strokedata import SkillClass
from strokeminer.utils.data_util import dumps_json
from strokeminer.utils.error_util import FormatError, InvalidParameter, StrokeMinerException

log = logging.getLogger(__name__)

MODEL_HEADER = "strokeminer-model v1"

Model = Union[DecisionTree, NBTree]


def _split(node, schema) -> dict:
    return {
        "attribute": schema[node.attribute],
        "threshold": float(node.threshold),
        "counts": list(node.class_counts),
    }


def _c45_node(node, tree: DecisionTree) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": {"counts": list(node.class_counts), "majority": tree.class_alphabet[node.majority]}}
    return {"split": _split(node, tree.schema),
            "le": _c45_node(node.left, tree),
            "gt": _c45_node(node.right, tree)}


def _naive_bayes(model: NaiveBayesModel) -> dict:
    per_class = {}
    for i, c in enumerate(model.class_alphabet):
        if model.class_counts[i] > 0:
            per_class[c.value] = {"mean": model.means[i], "variance": model.variances[i]}
    return {"counts": model.class_counts, "priors": model.priors, "variance_floor": model.variance_floor,
            "classes": per_class}


def _nbtree_node(node, tree: NBTree) -> dict:
    if isinstance(node, NBLeaf):
        return {"naive_bayes": _naive_bayes(node.model)}
    return {"split": _split(node, tree.schema),
            "le": _nbtree_node(node.left, tree),
            "gt": _nbtree_node(node.right, tree)}


def serialize_model(model: Model) -> str:
    if isinstance(model, DecisionTree):
        root = _c45_node(model.root, model)
    elif isinstance(model, NBTree):
        root = _nbtree_node(model.root, model)
    else:
        raise InvalidParameter(f"cannot serialize {type(model).__name__}")
    body = {
        "learner": model.learner,
        "schema": model.schema,
        "classes": model.class_alphabet,
        "params": model.params.to_dict(),
        "root": root,
    }
    return f"{MODEL_HEADER}\n{dumps_json(body)}"


class _Reader:
    def __init__(self, schema, class_alphabet):
        self.index = {name: i for i, name in enumerate(schema)}
        self.class_alphabet = class_alphabet
        self.n_features = len(schema)

    def split(self, node: dict):
        split = node["split"]
        name = split["attribute"]
        if name not in self.index:
            raise FormatError(f"split attribute {name!r} is not in the schema")
        counts = tuple(int(c) for c in split["counts"])
        return self.index[name], float(split["threshold"]), counts

    def counts(self, values):
        counts = tuple(int(c) for c in values)
        if len(counts) != len(self.class_alphabet):
            raise FormatError(f"expected {len(self.class_alphabet)} class counts, got {len(counts)}")
        return counts

    def c45(self, node: dict):
        if "leaf" in node:
            leaf = node["leaf"]
            return Leaf(self.counts(leaf["counts"]), self.class_alphabet.index(SkillClass.parse(leaf["majority"])))
        attribute, threshold, counts = self.split(node)
        return Internal(attribute, threshold, self.c45(node["le"]), self.c45(node["gt"]), counts)

    def naive_bayes(self, body: dict) -> NaiveBayesModel:
        k = len(self.class_alphabet)
        counts = np.array(self.counts(body["counts"]), dtype=np.int64)
        means = np.zeros((k, self.n_features))
        variances = np.ones((k, self.n_features))
        for name, gaussian in body["classes"].items():
            i = self.class_alphabet.index(SkillClass.parse(name))
            means[i] = gaussian["mean"]
            variances[i] = gaussian["variance"]
        priors = np.array(body["priors"], dtype=np.float64)
        return NaiveBayesModel(self.class_alphabet, counts, priors, means, variances, float(body["variance_floor"]))

    def nbtree(self, node: dict):
        if "naive_bayes" in node:
            return NBLeaf(self.naive_bayes(node["naive_bayes"]))
        attribute, threshold, counts = self.split(node)
        return NBInternal(attribute, threshold, self.nbtree(node["le"]), self.nbtree(node["gt"]), counts)


def deserialize_model(text: str) -> Model:
    """
    :raises FormatError: on a wrong header or a malformed body.
    """
    header, _, body = text.partition("\n")
    if header.strip() != MODEL_HEADER:
        raise FormatError(f"not a model file: expected header {MODEL_HEADER!r}, got {header[:40]!r}")
    try:
        document = json.loads(body)
        schema = tuple(str(name) for name in document["schema"])
        class_alphabet = tuple(SkillClass.parse(c) for c in document["classes"])
        reader = _Reader(schema, class_alphabet)
        learner = document["learner"]
        if learner == DecisionTree.learner:
            return DecisionTree(reader.c45(document["root"]), schema, class_alphabet,
                                C45Params(**document["params"]))
        if learner == NBTree.learner:
            return NBTree(reader.nbtree(document["root"]), schema, class_alphabet,
                          NBTreeParams(**document["params"]))
        raise FormatError(f"unknown learner {learner!r}")
    except FormatError:
        raise
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError, StrokeMinerException) as e:
        raise FormatError(f"malformed model body: {e}", subexception=e)
