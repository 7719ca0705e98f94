#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT

import sys

from trapkinetics import trapsim

if __name__ == "__main__":
    sys.exit(trapsim.main())
