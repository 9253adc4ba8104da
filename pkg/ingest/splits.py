import logging

import numpy as np

from .models import EmbeddingDataset, Tag

logger = logging.getLogger(__name__)


def split_generator(seed):
    """Generator behind every split: PCG64 seeded through ``SeedSequence(seed)``.

    Both are specified bit-for-bit by NumPy, so a seed selects the same
    subsets on every platform.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def scenario1_split(test_set, spec):
    """Draw the disjoint attack-source subset X1 and clean subset X2.

    One uniform permutation of the test set is drawn; its first ``n1``
    positions form X1 and the next ``n2`` form X2. Each subset keeps the
    source order of its records. X2 is re-tagged clean; X1 keeps its tags
    and is meant to be handed to an external attacker.
    """
    spec.check_against(len(test_set))
    order = split_generator(spec.seed).permutation(len(test_set))
    x1_index = np.sort(order[: spec.n1])
    x2_index = np.sort(order[spec.n1 : spec.n1 + spec.n2])

    x1 = EmbeddingDataset(
        d=test_set.d,
        records=tuple(test_set.records[i] for i in x1_index),
        layer_tag=test_set.layer_tag,
    )
    x2 = EmbeddingDataset(
        d=test_set.d,
        records=tuple(test_set.records[i].with_tag(Tag.CLEAN) for i in x2_index),
        layer_tag=test_set.layer_tag,
    )
    logger.info(
        f"Split {len(test_set)} records into X1={len(x1)} / X2={len(x2)} (seed={spec.seed})"
    )
    return x1, x2
