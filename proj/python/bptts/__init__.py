# Copyright 2026 The BPTTS Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Learned WENO sub-stencil weights trained through unrolled simulations."""

from bptts._core import (
    NUM_PARAMS,
    BlowupError,
    ConfigError,
    DomainError,
    FormatError,
    ParameterError,
    burgers_ic_names,
    cell_centers,
    default_config,
    episode_gradient,
    euler_ic_names,
    final_errors,
    gradcheck,
    init_params,
    initial_state,
    load_params,
    policy_forward,
    random_params,
    random_suite,
    rollout,
    save_params,
    train,
    weno_step,
)

__all__ = [
    "NUM_PARAMS",
    "BlowupError",
    "ConfigError",
    "DomainError",
    "FormatError",
    "ParameterError",
    "burgers_ic_names",
    "cell_centers",
    "default_config",
    "episode_gradient",
    "euler_ic_names",
    "final_errors",
    "gradcheck",
    "init_params",
    "initial_state",
    "load_params",
    "policy_forward",
    "random_params",
    "random_suite",
    "rollout",
    "save_params",
    "train",
    "weno_step",
]
