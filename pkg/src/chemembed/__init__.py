"""chemembed: intrinsic and extrinsic evaluation of word embeddings.

Library modules:

* :mod:`chemembed.corpus` — CoNLL ingestion, vocabularies, overlap stats
* :mod:`chemembed.embeddings` — word2vec I/O, cosine, exact kNN
* :mod:`chemembed.derive` — occurrence averaging, SVD standardization
* :mod:`chemembed.intrinsic` — similarity/agreement/correlation analyses
* :mod:`chemembed.tsne` — 2-D projection
* :mod:`chemembed.tagger` — GRU-CRF sequence labeler with training loop
* :mod:`chemembed.synthetic` — generated benchmark corpora and embeddings

The ``chemembed`` command wires these into reproducible runs.
"""

__version__ = "0.1.0"
