#pragma once

#define SEPLRT_VERSION_MAJOR 0
#define SEPLRT_VERSION_MINOR 1
#define SEPLRT_VERSION_PATCH 0
#define SEPLRT_VERSION "0.1.0"
