# Copyright 2026 The GNSS Sentinel Authors. All Rights Reserved.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#     http://www.apache.org/licenses/LICENSE-2.0
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""GNSS jamming and spoofing classification toolkit."""

from ._core import (
    Classifier,
    DataError,
    NumericalError,
    UsageError,
    __version__,
    confusion_matrix,
    fit,
    jam_class_names,
    rebalance,
    roc_auc_ovr,
    run_cli,
    set_thread_count,
    spectrogram_image,
    stft,
    synth_signal,
    synth_spoof_dataset,
)

__all__ = [
    "Classifier",
    "DataError",
    "NumericalError",
    "UsageError",
    "__version__",
    "confusion_matrix",
    "fit",
    "jam_class_names",
    "rebalance",
    "roc_auc_ovr",
    "run_cli",
    "set_thread_count",
    "spectrogram_image",
    "stft",
    "synth_signal",
    "synth_spoof_dataset",
]
