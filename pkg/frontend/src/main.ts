import { SurveyApi } from "./api.js";
import { QuizApp } from "./quiz.js";

const root = document.getElementById("app");
if (root) {
  const app = new QuizApp(root, new SurveyApi());
  void app.start();
}
