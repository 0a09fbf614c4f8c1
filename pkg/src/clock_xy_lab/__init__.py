# SPDX-FileCopyrightText: 2024-present clock_xy_lab contributors
#
# SPDX-License-Identifier: MIT
