// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
