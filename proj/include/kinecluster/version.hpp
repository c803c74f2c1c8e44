#pragma once

#define KINECLUSTER_VERSION "0.1.0"
