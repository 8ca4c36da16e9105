#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "bindlab/errors.hpp"
#include "bindlab/task.hpp"

namespace bindlab {

namespace vocab {

inline const std::vector<std::string>& people() {
  static const std::vector<std::string> v{
      "John", "Mary", "Ann",  "Joe",  "Pete", "Tim",  "Max",  "Sue",  "Bob",  "Kate",
      "Paul", "Lucy", "Mark", "Emma", "Jack", "Lily", "Sam",  "Rose", "Tom",  "Jane",
      "Carl", "Nina", "Fred", "Olga", "Hugo", "Vera", "Leo",  "Iris"};
  return v;
}

inline const std::vector<std::string>& foods() {
  static const std::vector<std::string> v{
      "ale",   "jam",   "pie",   "tea",    "cod",   "rum",   "gin",   "kale",
      "rice",  "soup",  "cake",  "tart",   "stew",  "bread", "honey", "plums",
      "pears", "grapes", "mango", "melon", "olives", "pasta", "curry", "toast"};
  return v;
}

}  // namespace vocab

namespace detail {

inline EntityRole role(int id, std::string name, std::vector<std::string> words) {
  return EntityRole{id, std::move(name), std::move(words)};
}

inline TemplatePtr make_template(std::string id, std::string preamble, std::string clause,
                                 std::map<int, std::string> questions,
                                 std::vector<EntityRole> roles) {
  auto t = std::make_shared<TaskTemplate>();
  t->id = std::move(id);
  t->preamble = std::move(preamble);
  t->clause = std::move(clause);
  t->questions = std::move(questions);
  t->roles = std::move(roles);
  return t;
}

inline std::vector<TemplatePtr> build_catalog() {
  using vocab::people;
  std::vector<TemplatePtr> tasks;

  tasks.push_back(make_template(
      "filling_liquids", "At a busy restaurant, to fulfill an order, ", "$1 fills a $2 with $3",
      {{1, "Who filled a $2 with $3?"},
       {2, "What did $1 fill with $3?"},
       {3, "What did $1 fill a $2 with?"}},
      {role(1, "person", people()),
       role(2, "container",
            {"cup", "glass", "mug", "jar", "bottle", "flask", "pitcher", "jug",
             "bowl", "tumbler", "goblet", "chalice", "carafe", "decanter", "thermos", "canteen",
             "kettle", "vase", "pail", "bucket", "tankard", "stein", "teacup", "urn"}),
       role(3, "liquid",
            {"wine", "beer", "water", "milk", "juice", "coffee", "cider", "soda",
             "lemonade", "broth", "vinegar", "syrup", "cocoa", "whiskey", "vodka", "brandy",
             "sherry", "espresso", "kefir", "smoothie", "tonic", "nectar", "punch", "champagne"})}));

  tasks.push_back(make_template(
      "people_objects", "", "$1 put the $2 in the $3",
      {{1, "Who put the $2 in the $3?"},
       {2, "What did $1 put in the $3?"},
       {3, "Where did $1 put the $2?"}},
      {role(1, "person", people()),
       role(2, "object",
            {"toy", "medicine", "book", "key", "wallet", "phone", "lamp", "hat",
             "ball", "pen", "clock", "radio", "camera", "scarf", "umbrella", "candle",
             "map", "ring", "watch", "spoon", "brush", "mirror", "blanket", "pillow"}),
       role(3, "room",
            {"kitchen", "office", "bedroom", "garage", "attic", "basement", "hallway", "bathroom",
             "garden", "cellar", "closet", "pantry", "study", "library", "lobby", "balcony",
             "porch", "nursery", "laundry", "shed", "loft", "den", "studio", "gym"})}));

  tasks.push_back(make_template(
      "programming_dictionary", "The following are dictionary variables in Python: ",
      "$1={'name':'$2', 'Country':'$3'}",
      {{1, "Which variable has 'name' == '$2' and 'Country' == '$3'?"},
       {2, "What is the name in variable $1 where 'Country' == '$3'?"},
       {3, "What is the country in variable $1 where 'name' == '$2'?"}},
      {role(1, "variable",
            {"alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
             "iota", "kappa", "lambda", "mu", "nu", "xi", "omicron", "pi",
             "rho", "sigma", "tau", "upsilon", "phi", "chi", "psi", "omega"}),
       role(2, "person", people()),
       role(3, "country",
            {"US", "Canada", "Mexico", "Brazil", "France", "Spain", "Italy", "Germany",
             "Japan", "China", "India", "Egypt", "Kenya", "Peru", "Chile", "Norway",
             "Sweden", "Poland", "Greece", "Turkey", "Ireland", "Portugal", "Vietnam",
             "Argentina"})}));

  tasks.push_back(make_template(
      "music", "At the music festival, ", "$1 performed $2 music on the $3",
      {{1, "Who performed $2 music on the $3?"},
       {2, "What music did $1 play on the $3?"},
       {3, "What instrument did $1 play $2 music on?"}},
      {role(1, "person", people()),
       role(2, "genre",
            {"rock", "pop", "jazz", "blues", "folk", "funk", "soul", "metal",
             "punk", "reggae", "disco", "techno", "opera", "gospel", "salsa", "swing",
             "ska", "grunge", "trance", "ambient", "bluegrass", "flamenco", "tango", "polka"}),
       role(3, "instrument",
            {"guitar", "piano", "violin", "drums", "flute", "cello", "trumpet", "harp",
             "saxophone", "clarinet", "banjo", "ukulele", "mandolin", "trombone", "oboe",
             "accordion", "harmonica", "bass", "tuba", "organ", "sitar", "xylophone",
             "bagpipes", "viola"})}));

  tasks.push_back(make_template(
      "biology_experiment", "In a biology laboratory experiment, ", "$1 placed the $2 in a $3",
      {{1, "Who placed the $2 in a $3?"},
       {2, "What did $1 place in a $3?"},
       {3, "Where did $1 place the $2?"}},
      {role(1, "person", people()),
       role(2, "substance",
            {"serum", "enzyme", "plasma", "antibody", "protein", "hormone", "reagent", "buffer",
             "antigen", "peptide", "vaccine", "toxin", "insulin", "collagen", "glucose",
             "saline", "agar", "lipid", "yeast", "spore", "culture", "ribosome", "keratin",
             "pepsin"}),
       role(3, "vessel",
            {"beaker", "vial", "flask", "tube", "dish", "jar", "ampoule", "cuvette",
             "bottle", "syringe", "pipette", "incubator", "centrifuge", "canister", "carboy",
             "dropper", "cylinder", "tray", "rack", "chamber", "cassette", "reservoir",
             "capsule", "cooler"})}));

  tasks.push_back(make_template(
      "chemistry_experiment", "In a chemistry laboratory experiment, ", "$1 added the $2 to a $3",
      {{1, "Who added the $2 to a $3?"},
       {2, "What did $1 add to a $3?"},
       {3, "Where did $1 add the $2?"}},
      {role(1, "person", people()),
       role(2, "chemical",
            {"ethanol", "acetone", "methanol", "benzene", "toluene", "ammonia", "bleach",
             "glycerol", "hexane", "xylene", "phenol", "iodine", "bromine", "chlorine",
             "sulfur", "sodium", "potassium", "calcium", "magnesium", "nitrate", "sulfate",
             "acetate", "formaldehyde", "peroxide"}),
       role(3, "apparatus",
            {"crucible", "funnel", "beaker", "flask", "retort", "burette", "pipette",
             "condenser", "desiccator", "cuvette", "vial", "tube", "dish", "jar", "bottle",
             "basin", "kettle", "bath", "column", "mortar", "trough", "ampoule", "canister",
             "carboy"})}));

  tasks.push_back(make_template(
      "transportation", "In a city transportation system, ", "$1 drove the $2 to the $3",
      {{1, "Who drove the $2 to the $3?"},
       {2, "What did $1 drive to the $3?"},
       {3, "Where did $1 drive the $2?"}},
      {role(1, "person", people()),
       role(2, "vehicle",
            {"truck", "taxi", "bus", "van", "car", "tractor", "jeep", "limo",
             "scooter", "motorcycle", "trolley", "tram", "ambulance", "minivan", "sedan",
             "pickup", "wagon", "coupe", "convertible", "buggy", "forklift", "bulldozer",
             "hatchback", "rickshaw"}),
       role(3, "destination",
            {"mall", "park", "airport", "station", "museum", "school", "hospital", "stadium",
             "library", "market", "harbor", "zoo", "theater", "bakery", "beach", "bank",
             "cinema", "church", "factory", "hotel", "office", "plaza", "pier", "campus"})}));

  tasks.push_back(make_template(
      "sports_events", "In a sports competition, ", "$1 played $2 at the $3",
      {{1, "Who played $2 at the $3?"},
       {2, "What did $1 play at the $3?"},
       {3, "Where did $1 play $2?"}},
      {role(1, "person", people()),
       role(2, "sport",
            {"hockey", "cricket", "soccer", "tennis", "golf", "rugby", "baseball",
             "basketball", "volleyball", "badminton", "squash", "polo", "lacrosse", "handball",
             "softball", "netball", "curling", "bowling", "fencing", "archery", "boxing", "judo",
             "karate", "wrestling"}),
       role(3, "venue",
            {"stadium", "field", "arena", "court", "gym", "rink", "pitch", "track",
             "pool", "dome", "pavilion", "clubhouse", "coliseum", "ballpark", "velodrome",
             "oval", "lawn", "hall", "beach", "park", "gymnasium", "racecourse", "hippodrome",
             "amphitheater"})}));

  tasks.push_back(make_template(
      "space_observations", "During an astronomy study, ", "$1 observed the $2 with the $3",
      {{1, "Who observed the $2 with the $3?"},
       {2, "What did $1 observe with the $3?"},
       {3, "What did $1 use to observe the $2?"}},
      {role(1, "person", people()),
       role(2, "body",
            {"planet", "asteroid", "comet", "moon", "star", "galaxy", "nebula", "meteor",
             "quasar", "pulsar", "supernova", "satellite", "magnetar", "exoplanet", "protostar",
             "constellation", "eclipse", "aurora", "meteorite", "nova", "blazar", "moonlet",
             "planetoid", "centaur"}),
       role(3, "instrument",
            {"telescope", "radar", "spectrometer", "camera", "antenna", "binoculars",
             "photometer", "interferometer", "magnetometer", "lens", "probe", "sensor",
             "detector", "periscope", "reflector", "refractor", "coronagraph", "bolometer",
             "radiometer", "heliometer", "astrolabe", "sextant", "theodolite",
             "spectroscope"})}));

  tasks.push_back(make_template(
      "boxes", "", "the $1 is in box $2",
      {{1, "What is in Box $2?"}, {2, "Which box is the $1 in?"}},
      {role(1, "object",
            {"toy", "medicine", "pen", "ball", "rock", "bottle", "book", "key",
             "coin", "watch", "ring", "cup", "phone", "map", "shoe", "sock",
             "hat", "glove", "apple", "banana", "candle", "spoon", "fork", "knife"}),
       role(2, "label",
            {"A", "B", "C", "D", "E", "F", "G", "H", "J", "K", "L", "M", "N",
             "O", "P", "Q", "R", "S", "T", "U", "V", "W", "X", "Y", "Z"})}));

  return tasks;
}

}  // namespace detail

// The ten binding tasks, in a fixed order.
inline const std::vector<TemplatePtr>& all_tasks() {
  static const std::vector<TemplatePtr> catalog = detail::build_catalog();
  return catalog;
}

// Two-column "X loves Y" template used for the worked examples. Its clauses are
// joined without a final conjunction.
inline TemplatePtr love_template() {
  static const TemplatePtr t = [] {
    auto tpl = std::make_shared<TaskTemplate>();
    tpl->id = "love";
    tpl->clause = "$1 loves $2";
    tpl->questions = {{1, "Who loves $2?"}, {2, "What does $1 love?"}};
    tpl->roles = {detail::role(1, "person", vocab::people()),
                  detail::role(2, "food", vocab::foods())};
    tpl->final_conjunction = "";
    return std::shared_ptr<const TaskTemplate>(std::move(tpl));
  }();
  return t;
}

inline TemplatePtr find_task(std::string_view id) {
  for (const auto& t : all_tasks()) {
    if (t->id == id) return t;
  }
  if (id == "love") return love_template();
  std::string known;
  for (const auto& t : all_tasks()) known += " " + t->id;
  throw TemplateError("unknown task '" + std::string(id) + "'; known:" + known + " love");
}

}  // namespace bindlab
