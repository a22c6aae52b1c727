# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
from oaca.cli.main import run

if __name__ == "__main__":
    run()
