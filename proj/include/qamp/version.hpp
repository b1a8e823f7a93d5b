#pragma once

#define QAMP_VERSION "0.1.0"
