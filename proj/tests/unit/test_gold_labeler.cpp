#include <gtest/gtest.h>

#include "fairmeta/gold_labeler.hpp"
#include "test_support.hpp"

using namespace fairmeta;

TEST(GoldLabeler, RuleExamples) {
  EXPECT_EQ(label_tissue_value("lung cancer"), TissueLabel::Lung);
  EXPECT_EQ(label_tissue_value("HCC tumor"), TissueLabel::Liver);
  EXPECT_EQ(label_tissue_value("Ovarian surface epithelium"), TissueLabel::Ovary);
  EXPECT_EQ(label_tissue_value("PBMCs"), TissueLabel::Blood);
  EXPECT_EQ(label_tissue_value("whole blood"), TissueLabel::Blood);
  EXPECT_EQ(label_tissue_value("plasma"), TissueLabel::Plasma);
  EXPECT_EQ(label_tissue_value("lymph node"), TissueLabel::Lymph);
  EXPECT_EQ(label_tissue_value("NSCLC tumor"), TissueLabel::Unknown);
  EXPECT_EQ(label_tissue_value(""), TissueLabel::Unknown);
}

TEST(GoldLabeler, EarlierRulesWin) {
  EXPECT_EQ(label_tissue_value("lung metastasis in liver"), TissueLabel::Lung);
  EXPECT_EQ(label_tissue_value("blood plasma"), TissueLabel::Blood);
  EXPECT_EQ(label_tissue_value("lymphocytes from blood"), TissueLabel::Blood);
  EXPECT_EQ(label_tissue_value("ovarian cancer, HCC history"), TissueLabel::Liver);
}

TEST(GoldLabeler, OnlyTheTissueFieldCounts) {
  using testing_support::make_record;
  EXPECT_EQ(assign_tissue_label(make_record("a", {{"description", "lung biopsy"}, {"tissue", "tumor"}})),
            TissueLabel::Unknown);
  EXPECT_EQ(assign_tissue_label(make_record("b", {{"tissue_type", "Liver"}})), TissueLabel::Liver);
  EXPECT_EQ(assign_tissue_label(make_record("c", {{"tissue", "NA"}})), TissueLabel::Unknown);
  EXPECT_EQ(assign_tissue_label(make_record("d", {{"age", "3"}})), TissueLabel::Unknown);
  EXPECT_EQ(assign_tissue_label(make_record("e", {{"tissue", "blood"}, {"tissue", "lung"}})), TissueLabel::Blood);
}

TEST(GoldLabeler, QueryValueMapping) {
  EXPECT_EQ(label_to_query_value(TissueLabel::Ovary), "ovary");
  EXPECT_EQ(label_to_query_value(TissueLabel::Plasma), std::nullopt);
  EXPECT_EQ(label_to_query_value(TissueLabel::Unknown), std::nullopt);
  EXPECT_EQ(query_value_to_label("blood"), TissueLabel::Blood);
  EXPECT_EQ(query_value_to_label("lymph"), std::nullopt);
  for (auto label : {TissueLabel::Lung, TissueLabel::Liver, TissueLabel::Ovary, TissueLabel::Blood}) {
    EXPECT_EQ(query_value_to_label(*label_to_query_value(label)), label);
  }
}
