#pragma once

#include "exactdif/csv_io.hpp"

namespace exactdif {

/// HCI item 17 with abilities binned into 6 levels (A x G x R counts).
inline ItemTable hci_item17() {
  return {"17", ContingencyTable(AxisSpec::uniform(6, 2),
                                 {11, 4, 10, 2, 32, 10, 30, 7, 61, 27, 66, 19,
                                  49, 14, 83, 24, 35, 14, 67, 47, 3, 5, 11, 20})};
}

}  // namespace exactdif
