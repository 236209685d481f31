# SPDX-License-Identifier: Apache-2.0
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Python bindings for the iscap beamforming library."""

from ._iscap import (
    CuType,
    Scenario,
    Solution,
    SolveStatus,
    SweepRow,
    db_to_ratio,
    dbm_to_watt,
    detection_probability,
    export_sdpa,
    power_map,
    q_function,
    q_inverse,
    ratio_to_db,
    solve,
    sweep,
    verify,
    watt_to_dbm,
)

__all__ = [
    "CuType",
    "Scenario",
    "Solution",
    "SolveStatus",
    "SweepRow",
    "db_to_ratio",
    "dbm_to_watt",
    "detection_probability",
    "export_sdpa",
    "power_map",
    "q_function",
    "q_inverse",
    "ratio_to_db",
    "solve",
    "sweep",
    "verify",
    "watt_to_dbm",
]
