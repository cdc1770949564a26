#pragma once

#include <map>
#include <string>
#include <vector>

namespace xmlread {

struct PnmlNet {
  std::vector<std::string> places;
  std::map<std::string, std::string> transition_labels;  // id -> label ("" when silent)
  std::vector<std::pair<std::string, std::string>> arcs;
  std::map<std::string, int> initial;
  std::map<std::string, int> final_marking;
};

struct BpmnElement {
  std::string tag;
  std::string id;
  std::string name;
};

struct BpmnDoc {
  std::vector<BpmnElement> elements;
  std::vector<std::pair<std::string, std::string>> flows;  // source, target
};

PnmlNet read_pnml(const std::string& xml);
BpmnDoc read_bpmn(const std::string& xml);

}  // namespace xmlread
